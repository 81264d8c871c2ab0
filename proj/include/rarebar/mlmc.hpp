#pragma once

#include <cstddef>
#include <vector>

#include "rarebar/contract.hpp"
#include "rarebar/errors.hpp"
#include "rarebar/model.hpp"

namespace rarebar {

/// Multilevel Monte Carlo configuration. Level l simulates n0 * refine^l
/// Milstein steps; the payoff is weighted by Brownian-bridge survival
/// probabilities on each interval. Either a fixed level count with a total
/// sample budget, or an adaptive mode targeting a CV, drives termination.
struct MlmcConfig {
  std::size_t n0 = 16;        // coarsest step count
  std::size_t refine = 4;     // refinement factor (even, >= 2)
  std::size_t n_levels = 5;   // fixed-level mode: levels l = 0..n_levels-1
  std::size_t total_samples = 200000;  // sample budget across levels
  double target_cv = 0.0;     // > 0 switches to adaptive mode (budget becomes a cap)
  std::size_t pilot_samples = 500;     // per-level pilot for the allocation
  bool coarse_half_step = false;  // use b^2 h/2 in the coarse half-interval factors
  bool digital = false;           // payoff 1{S_N >= K} instead of (S_N - K)^+

  void validate() const;
};

struct MlmcResult {
  double price_hat = 0.0;            // discounted to t = 0
  std::vector<double> level_means;   // E[P_l - P_{l-1}] estimates (undiscounted)
  std::vector<double> level_vars;
  std::vector<std::size_t> level_samples;
  double total_cost = 0.0;           // sum over levels of samples x steps
  double cv_hat = 0.0;               // estimated CV of price_hat
};

/// Probability that the bridge between (s_i, s_ip1) over a step of length h
/// stays inside (L, U); zero when either endpoint is at or beyond a barrier.
double survival_prob_fine(double s_i, double s_ip1, double b, double h, double upper,
                          double lower);

/// Coarse-interval survival built from two half-interval factors per barrier
/// through the bridge midpoint. `half_step` selects the b^2 h/2 denominator
/// convention; the default keeps b^2 h in all four factors.
double survival_prob_coarse(double s_i, double s_mid, double s_ip1, double b, double h,
                            double upper, double lower, bool half_step = false);

/// Deterministic cores of the bridge-extremum samplers (X is the uniform draw).
double bridge_maximum_from_uniform(double s_i, double s_ip1, double b, double h, double x);
double bridge_minimum_from_uniform(double s_i, double s_ip1, double b, double h, double x);

/// Sample the maximum / minimum of the interpolating bridge on one interval.
double sample_bridge_maximum(double s_i, double s_ip1, double b, double h, RngStream& rng);
double sample_bridge_minimum(double s_i, double s_ip1, double b, double h, RngStream& rng);

struct LevelSample {
  double fine_payoff = 0.0;
  double coarse_payoff = 0.0;  // 0 at level 0
};

/// One coupled fine/coarse sample at the given level, both undiscounted.
LevelSample mlmc_level_sample(std::size_t level, const GbmParams& params,
                              const BarrierContract& contract, const MlmcConfig& config,
                              RngStream& rng);

/// Telescoping estimator over the configured levels, with per-level sample
/// counts allocated proportionally to sqrt(V_l / C_l) from a pilot pass.
/// In adaptive mode, throws BudgetExceededError when target_cv is still
/// unmet at the budget cap.
MlmcResult run_mlmc(const GbmParams& params, const BarrierContract& contract,
                    const MlmcConfig& config, RngStream& rng);

}  // namespace rarebar
