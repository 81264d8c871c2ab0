#pragma once

#include <vector>

#include "rarebar/contract.hpp"
#include "rarebar/model.hpp"

namespace rarebar {

/// Symmetric Gaussian component proposal for the modified Metropolis
/// transition. One spread is shared across all components.
struct MmaProposal {
  double spread = 1.0;

  void validate() const;
};

/// One Markov chain state together with its cached evaluation.
struct ChainState {
  NormalVector z;
  double g = 0.0;
  double terminal = 0.0;
};

struct MmaStepResult {
  NormalVector next;
  double next_g = 0.0;
  bool accepted = false;
};

/// min(1, phi(psi)/phi(current)) for standard normal marginals.
double mma_component_acceptance(double current, double psi);

/// Advance a state whose g already satisfies g >= threshold. Proposes each
/// component against its standard-normal marginal, then accepts or rejects
/// the assembled candidate on a single path evaluation. Returns whether the
/// candidate was taken; on rejection the state is unchanged.
bool mma_step_in_place(ChainState& state, double threshold, const PathEvaluator& eval,
                       const MmaProposal& proposal, RngStream& rng);

/// Convenience wrapper over mma_step_in_place; verifies the precondition
/// that `current` lies inside the level event and throws std::logic_error
/// otherwise.
MmaStepResult mma_step(const NormalVector& current, double threshold,
                       const BarrierContract& contract, const GbmParams& params,
                       const MmaProposal& proposal, RngStream& rng);

/// Chain of `length` states starting from (and including) the seed.
std::vector<ChainState> run_chain(const NormalVector& seed, std::size_t length,
                                  double threshold, const BarrierContract& contract,
                                  const GbmParams& params, const MmaProposal& proposal,
                                  RngStream& rng);

}  // namespace rarebar
