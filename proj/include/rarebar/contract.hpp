#pragma once

#include <span>
#include <vector>

#include "rarebar/model.hpp"

namespace rarebar {

/// Double knock-out call. Barriers are per-monitoring-date vectors; the
/// scalar factory broadcasts a constant barrier across the grid. A path
/// touching a barrier exactly survives (the performance terms use strict
/// inequalities), and at maturity the strike takes over the lower-bound role.
struct BarrierContract {
  std::vector<double> lower;  // L_1..L_N
  std::vector<double> upper;  // U_1..U_N
  double strike = 100.0;
  double rate = 0.1;          // per year
  double maturity = 1.0;      // years

  static BarrierContract constant(double lower, double upper, double strike,
                                  double rate, double maturity, std::size_t n);

  std::size_t n_dates() const { return lower.size(); }

  /// Throws std::invalid_argument on a violated invariant
  /// (L_n < U_n, K < U_N, K > 0, matching vector lengths).
  void validate() const;
};

/// Performance g(S) = sum_n g_n(S_n): for n < N the per-date penalty is
/// U_n - S_n above the upper barrier or S_n - L_n below the lower one; at
/// n = N the strike replaces the lower barrier. Always <= 0, and == 0
/// exactly when the path pays off.
double performance(const BarrierContract& contract, const PricePath& path);

/// True iff g(S) == 0.
bool in_event(const BarrierContract& contract, const PricePath& path);

/// S_N - K on event paths, 0 otherwise.
double payoff(const BarrierContract& contract, const PricePath& path);

/// value * exp(-r t).
double discount(double value, double rate, double years);

/// Result of evaluating one standard-normal input vector against a contract.
struct PathEval {
  double g = 0.0;
  double terminal = 0.0;

  bool in_event() const { return g == 0.0; }
};

/// Fused evaluator for the hot sampling loops: maps a Z-vector straight to
/// (g, S_N) without materialising the price path. Walks the trajectory in
/// log space and exponentiates only on barrier breaches, so event paths cost
/// one exp. Agrees with evolve() + performance() up to floating round-off.
class PathEvaluator {
 public:
  PathEvaluator(const GbmParams& params, const BarrierContract& contract);

  PathEval operator()(std::span<const double> z) const;

  std::size_t n_steps() const { return n_; }

 private:
  std::size_t n_;
  double log_s0_, drift_, vol_;
  double strike_, log_strike_;
  std::vector<double> lower_, upper_, log_lower_, log_upper_;
};

}  // namespace rarebar
