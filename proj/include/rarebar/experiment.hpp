#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rarebar/stats.hpp"

namespace rarebar {

/// Runtime knobs supplied next to the config file. Workers never influence
/// results, only scheduling, and are excluded from the emitted config.
struct ExperimentOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::size_t workers = 1;
  std::vector<std::pair<std::string, std::string>> overrides;  // dotted path -> JSON value
};

struct SweepSpec {
  std::string parameter;        // dotted path into the config, e.g. "model.sigma"
  std::vector<double> values;
};

/// A config parsed down to domain values. `raw` keeps the resolved JSON
/// (seed and runs folded in, workers excluded) for the audit record.
struct ResolvedExperiment {
  GbmParams params;
  double lower = 0.0;
  double upper = 0.0;
  BarrierContract contract;
  std::vector<EstimatorConfig> methods;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::optional<double> reference_price;
  std::optional<SweepSpec> sweep;
  std::string resolved_json;  // serialized resolved config
};

/// Parse a config document, folding in options and dotted-path overrides.
/// Throws std::invalid_argument with a message naming the violated field.
ResolvedExperiment parse_experiment(const std::string& config_json,
                                    const ExperimentOptions& options);

/// Replicated estimate for the (single) configured method. Returns the JSON
/// record; `out_line`, when given, receives the one-line human summary.
/// Estimator non-convergence is reported in the JSON status field and by
/// the boolean result, not by throwing.
struct PriceOutcome {
  bool ok = false;
  std::string json;
  std::string line;
};
PriceOutcome run_price(const std::string& config_json, const ExperimentOptions& options);

/// One CSV row per (sweep value x method), fixed column order:
/// sigma, lower, upper, method, runs, p_hat_mean, p_hat_cv, price_mean,
/// price_cv, mean_total_samples, failures.
std::string run_sweep(const std::string& config_json, const ExperimentOptions& options);

/// CV-ratio CSV comparing the first two configured methods per grid point.
/// SubSim always runs first so plain MC can be budgeted to its realised
/// mean total sample count (the equal-total-samples protocol).
std::string run_compare(const std::string& config_json, const ExperimentOptions& options);

/// Library version / build identifier string.
std::string build_id();

}  // namespace rarebar
