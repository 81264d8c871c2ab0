#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rarebar/contract.hpp"
#include "rarebar/mcs.hpp"
#include "rarebar/mlmc.hpp"
#include "rarebar/model.hpp"
#include "rarebar/subsim.hpp"

namespace rarebar {

enum class Method { mcs, subsim, mlmc };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// Which estimator to replicate, with its per-method tuning. Only the block
/// matching `method` is consulted.
struct EstimatorConfig {
  Method method = Method::subsim;
  std::size_t mcs_samples = 50000;
  SubSimConfig subsim;
  MlmcConfig mlmc;
};

/// One replication outcome. p_hat is NaN for MLMC runs (that estimator
/// reports a price only); failed runs keep the error message and are
/// excluded from the moments.
struct RunRecord {
  std::size_t run_index = 0;
  bool ok = false;
  std::string error;
  double p_hat = 0.0;
  double price_hat = 0.0;
  double total_samples = 0.0;
};

struct ReplicationSummary {
  std::size_t n_runs = 0;
  std::size_t n_failures = 0;
  std::optional<double> mean_p;
  std::optional<double> cv_p;       // unset when the mean is 0 or p is not estimated
  std::optional<double> mean_price;
  std::optional<double> cv_price;
  std::optional<double> mse_price;  // set when a reference price was supplied
  std::optional<double> bias_price;
  double mean_total_samples = 0.0;
  std::vector<RunRecord> records;   // sorted by run index
};

/// Run the estimator n_runs times on independent streams keyed by run index
/// and summarise. Results are identical for a fixed master seed regardless
/// of the worker count. Throws NonConvergenceError if more than 5% of the
/// runs fail.
ReplicationSummary replicate(const EstimatorConfig& estimator, const GbmParams& params,
                             const BarrierContract& contract, std::size_t n_runs,
                             std::uint64_t master_seed, std::size_t workers = 1,
                             std::optional<double> price_reference = std::nullopt);

/// Mean squared deviation from a reference value.
double mse(const std::vector<double>& values, double reference);

/// Least-squares fit of log(y) = slope * log(x) + intercept. Requires
/// positive data and at least two distinct x values.
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Complexity-scaling fit against |log p|. In mse mode the k exponent and
/// its constant c1 are filled (series ~ c1 |log p|^k up to sign: the fitted
/// slope is -k); in cost mode the r exponent and c2 (series ~ c2 |log p|^r).
struct ComplexityParams {
  double gamma = 0.0;
  double d = 2.0;
  std::optional<double> r_exp;
  std::optional<double> k_exp;
  std::optional<double> c1;
  std::optional<double> c2;
};

enum class ComplexityMode { mse, cost };

/// Requires at least 4 distinct probabilities with positive spread.
ComplexityParams fit_complexity(const std::vector<double>& p_values,
                                const std::vector<double>& series, ComplexityMode mode);

/// Per-grid-point CV ratios delta_1 / delta_2 for both p and price.
struct CvRatioRow {
  double grid_value = 0.0;
  std::optional<double> p_ratio;
  std::optional<double> price_ratio;
};

std::vector<CvRatioRow> cv_ratio_table(const std::vector<double>& grid,
                                       const std::vector<ReplicationSummary>& method1,
                                       const std::vector<ReplicationSummary>& method2);

}  // namespace rarebar
