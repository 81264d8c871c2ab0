#pragma once

#include <cstddef>
#include <vector>

#include "rarebar/contract.hpp"
#include "rarebar/errors.hpp"
#include "rarebar/mma.hpp"
#include "rarebar/model.hpp"

namespace rarebar {

/// Subset Simulation tuning. beta*m and 1/beta must both be integral, so
/// each level splits exactly into beta*m chains of length 1/beta.
struct SubSimConfig {
  std::size_t m = 50000;       // samples per level
  double beta = 0.1;           // level probability
  std::size_t max_levels = 20;
  MmaProposal proposal;

  std::size_t seeds_per_level() const;
  std::size_t chain_length() const;
  void validate() const;
};

struct LevelRecord {
  std::size_t level = 0;          // 1-based
  double alpha = 0.0;             // threshold selected from this level's samples (0 at the last level)
  double conditional_prob = 0.0;  // beta, or m_E/m at the last level
  std::size_t n_in_event = 0;     // samples with g == 0 at this level
};

struct SubSimResult {
  double p_hat = 0.0;
  double expected_terminal = 0.0;  // mean S_N over final-level event samples
  double price_hat = 0.0;          // discounted to t = 0
  std::vector<LevelRecord> levels;
  std::size_t n_levels = 0;        // L
  std::size_t m_event = 0;         // final-level samples with g == 0
  std::size_t m_star = 0;          // same count, reported separately
  std::size_t total_samples_used = 0;
};

/// Non-convergence carrying the levels completed before the budget ran out.
class SubSimNonConvergence : public NonConvergenceError {
 public:
  SubSimNonConvergence(const std::string& what, std::vector<LevelRecord> partial)
      : NonConvergenceError(what), levels(std::move(partial)) {}
  std::vector<LevelRecord> levels;
};

/// Midpoint threshold between the (beta m)-th and (beta m + 1)-th ordered
/// performance values. `sorted_g` must be length m, descending.
double alpha_threshold(const std::vector<double>& sorted_g, double beta, std::size_t m);

/// m + m (1 - beta) (L - 1).
std::size_t total_samples(std::size_t m, double beta, std::size_t L);

/// Theoretical CV sqrt((1+gamma)(1-beta) |ln p|^d / (M beta |ln beta|^d)).
double subsim_theoretical_cv(double p, double total_samples, double beta, double gamma,
                             double d);

/// Full Subset Simulation run: adaptive thresholds, seed selection and MMA
/// chain propagation, stopping once at least beta*m samples reach the event.
/// Chains are driven by substreams keyed on (level, seed index). Throws
/// SubSimNonConvergence past max_levels and StagnationError if a threshold
/// fails to increase strictly.
SubSimResult run_subsim(const GbmParams& params, const BarrierContract& contract,
                        const SubSimConfig& config, RngStream& rng);

}  // namespace rarebar
