#include "rarebar/mcs.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace rarebar {

McEstimate estimate_mcs(const GbmParams& params, const BarrierContract& contract,
                        std::size_t m, RngStream& rng) {
  if (m < 1) throw std::invalid_argument("estimate_mcs: m must be >= 1");
  const PathEvaluator eval(params, contract);
  const std::size_t n = params.n_steps;

  std::vector<double> z(n);
  std::size_t hits = 0;
  double terminal_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& v : z) v = rng.normal();
    const PathEval e = eval(z);
    if (e.in_event()) {
      ++hits;
      terminal_sum += e.terminal;
    }
  }

  McEstimate est;
  est.n_hits = hits;
  est.total_samples = m;
  est.p_hat = static_cast<double>(hits) / static_cast<double>(m);
  if (hits > 0) {
    const double terminal_mean = terminal_sum / static_cast<double>(hits);
    est.terminal_mean_in_event = terminal_mean;
    est.price_hat = discount(est.p_hat * (terminal_mean - contract.strike),
                             contract.rate, contract.maturity);
  }
  return est;
}

double mcs_theoretical_cv(double p, std::size_t m) {
  if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("mcs_theoretical_cv: requires 0 < p <= 1");
  if (m < 1) throw std::invalid_argument("mcs_theoretical_cv: m must be >= 1");
  return std::sqrt((1.0 - p) / (static_cast<double>(m) * p));
}

}  // namespace rarebar
