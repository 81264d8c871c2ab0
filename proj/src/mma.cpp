#include "rarebar/mma.hpp"

#include <cmath>
#include <stdexcept>

namespace rarebar {

void MmaProposal::validate() const {
  if (!(spread > 0.0)) throw std::invalid_argument("MmaProposal: spread must be > 0");
}

double mma_component_acceptance(double current, double psi) {
  if (std::abs(psi) <= std::abs(current)) return 1.0;
  return std::exp(0.5 * (current * current - psi * psi));
}

bool mma_step_in_place(ChainState& state, double threshold, const PathEvaluator& eval,
                       const MmaProposal& proposal, RngStream& rng) {
  const std::size_t n = state.z.size();
  NormalVector candidate(n);
  bool moved = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double cur = state.z[k];
    const double psi = cur + proposal.spread * rng.normal();
    double kept = cur;
    if (std::abs(psi) <= std::abs(cur)) {
      kept = psi;  // density ratio >= 1
    } else if (rng.uniform() < std::exp(0.5 * (cur * cur - psi * psi))) {
      kept = psi;
    }
    candidate[k] = kept;
    moved |= (kept != cur);
  }
  if (!moved) return false;

  const PathEval e = eval(candidate);
  if (e.g >= threshold) {
    state.z = std::move(candidate);
    state.g = e.g;
    state.terminal = e.terminal;
    return true;
  }
  return false;
}

MmaStepResult mma_step(const NormalVector& current, double threshold,
                       const BarrierContract& contract, const GbmParams& params,
                       const MmaProposal& proposal, RngStream& rng) {
  proposal.validate();
  const PathEvaluator eval(params, contract);
  const PathEval cur = eval(current);
  if (!(cur.g >= threshold)) {
    throw std::logic_error("mma_step: current state lies outside the level event");
  }
  ChainState state{current, cur.g, cur.terminal};
  const bool accepted = mma_step_in_place(state, threshold, eval, proposal, rng);
  return MmaStepResult{std::move(state.z), state.g, accepted};
}

std::vector<ChainState> run_chain(const NormalVector& seed, std::size_t length,
                                  double threshold, const BarrierContract& contract,
                                  const GbmParams& params, const MmaProposal& proposal,
                                  RngStream& rng) {
  if (length < 1) throw std::invalid_argument("run_chain: length must be >= 1");
  proposal.validate();
  const PathEvaluator eval(params, contract);
  const PathEval e0 = eval(seed);
  if (!(e0.g >= threshold)) {
    throw std::logic_error("run_chain: seed lies outside the level event");
  }
  std::vector<ChainState> chain;
  chain.reserve(length);
  chain.push_back(ChainState{seed, e0.g, e0.terminal});
  ChainState state = chain.front();
  for (std::size_t j = 1; j < length; ++j) {
    mma_step_in_place(state, threshold, eval, proposal, rng);
    chain.push_back(state);
  }
  return chain;
}

}  // namespace rarebar
