#pragma once

#include <cstddef>
#include <optional>

#include "rarebar/contract.hpp"
#include "rarebar/model.hpp"

namespace rarebar {

/// Plain Monte Carlo estimate of the execution probability and price.
/// A zero-hit outcome is a valid result: price 0, terminal mean unset.
struct McEstimate {
  double p_hat = 0.0;
  double price_hat = 0.0;              // discounted to t = 0
  std::size_t n_hits = 0;
  std::size_t total_samples = 0;
  std::optional<double> terminal_mean_in_event;
};

/// Draw m independent paths and estimate p_E and the discounted price via
/// the decomposition p * (E[S_N | E] - K).
McEstimate estimate_mcs(const GbmParams& params, const BarrierContract& contract,
                        std::size_t m, RngStream& rng);

/// sqrt((1-p) / (m p)); throws std::domain_error at p = 0.
double mcs_theoretical_cv(double p, std::size_t m);

}  // namespace rarebar
