#include "rarebar/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "rarebar/errors.hpp"

#ifndef RB_BUILD_ID
#define RB_BUILD_ID "dev"
#endif

namespace rarebar {

namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

const ojson& member(const ojson& obj, const std::string& ctx, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) bad(ctx + "." + key + " is required");
  return obj.at(key);
}

double num(const ojson& obj, const std::string& ctx, const std::string& key) {
  const ojson& v = member(obj, ctx, key);
  if (!v.is_number()) bad(ctx + "." + key + " must be a number");
  return v.get<double>();
}

double num_or(const ojson& obj, const std::string& ctx, const std::string& key, double def) {
  if (!obj.is_object() || !obj.contains(key)) return def;
  const ojson& v = obj.at(key);
  if (!v.is_number()) bad(ctx + "." + key + " must be a number");
  return v.get<double>();
}

std::size_t count_or(const ojson& obj, const std::string& ctx, const std::string& key,
                     std::size_t def) {
  if (!obj.is_object() || !obj.contains(key)) return def;
  const ojson& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    bad(ctx + "." + key + " must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

bool bool_or(const ojson& obj, const std::string& ctx, const std::string& key, bool def) {
  if (!obj.is_object() || !obj.contains(key)) return def;
  const ojson& v = obj.at(key);
  if (!v.is_boolean()) bad(ctx + "." + key + " must be a boolean");
  return v.get<bool>();
}

void set_by_path(ojson& root, const std::string& path, const ojson& value) {
  ojson* cur = &root;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (key.empty()) bad("override path '" + path + "' has an empty segment");
    const bool last = dot == std::string::npos;
    if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (...) {
        bad("override path '" + path + "': '" + key + "' is not an array index");
      }
      if (idx >= cur->size()) bad("override path '" + path + "': index out of range");
      if (last) {
        (*cur)[idx] = value;
        return;
      }
      cur = &(*cur)[idx];
    } else {
      if (last) {
        (*cur)[key] = value;
        return;
      }
      if (!cur->contains(key)) (*cur)[key] = ojson::object();
      cur = &(*cur)[key];
    }
    pos = dot + 1;
  }
}

EstimatorConfig parse_method(const ojson& j, const std::string& ctx) {
  if (!j.is_object()) bad(ctx + " must be an object");
  if (!j.contains("name") || !j.at("name").is_string()) bad(ctx + ".name is required");
  EstimatorConfig est;
  est.method = method_from_name(j.at("name").get<std::string>());
  switch (est.method) {
    case Method::mcs:
      est.mcs_samples = count_or(j, ctx, "samples", 50000);
      if (est.mcs_samples < 1) bad(ctx + ".samples must be >= 1");
      break;
    case Method::subsim:
      est.subsim.m = count_or(j, ctx, "m", est.subsim.m);
      est.subsim.beta = num_or(j, ctx, "beta", est.subsim.beta);
      est.subsim.max_levels = count_or(j, ctx, "max_levels", est.subsim.max_levels);
      est.subsim.proposal.spread = num_or(j, ctx, "spread", est.subsim.proposal.spread);
      est.subsim.validate();
      break;
    case Method::mlmc:
      est.mlmc.n0 = count_or(j, ctx, "n0", est.mlmc.n0);
      est.mlmc.refine = count_or(j, ctx, "refine", est.mlmc.refine);
      est.mlmc.n_levels = count_or(j, ctx, "n_levels", est.mlmc.n_levels);
      est.mlmc.total_samples = count_or(j, ctx, "total_samples", est.mlmc.total_samples);
      est.mlmc.target_cv = num_or(j, ctx, "target_cv", est.mlmc.target_cv);
      est.mlmc.pilot_samples = count_or(j, ctx, "pilot_samples", est.mlmc.pilot_samples);
      est.mlmc.coarse_half_step = bool_or(j, ctx, "coarse_half_step", est.mlmc.coarse_half_step);
      est.mlmc.digital = bool_or(j, ctx, "digital", est.mlmc.digital);
      est.mlmc.validate();
      break;
  }
  return est;
}

ojson method_to_json(const EstimatorConfig& est) {
  ojson j;
  j["name"] = method_name(est.method);
  switch (est.method) {
    case Method::mcs:
      j["samples"] = est.mcs_samples;
      break;
    case Method::subsim:
      j["m"] = est.subsim.m;
      j["beta"] = est.subsim.beta;
      j["max_levels"] = est.subsim.max_levels;
      j["spread"] = est.subsim.proposal.spread;
      break;
    case Method::mlmc:
      j["n0"] = est.mlmc.n0;
      j["refine"] = est.mlmc.refine;
      j["n_levels"] = est.mlmc.n_levels;
      j["total_samples"] = est.mlmc.total_samples;
      j["target_cv"] = est.mlmc.target_cv;
      j["pilot_samples"] = est.mlmc.pilot_samples;
      j["coarse_half_step"] = est.mlmc.coarse_half_step;
      j["digital"] = est.mlmc.digital;
      break;
  }
  return j;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = seed;
  for (std::uint64_t k : {a + 1, b + 1}) {
    x += 0x9e3779b97f4a7c15ULL * k;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x ^= x >> 31;
  }
  return x;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string("nan");
}

constexpr const char* kSweepHeader =
    "sigma,lower,upper,method,runs,p_hat_mean,p_hat_cv,price_mean,price_cv,"
    "mean_total_samples,failures\n";

void append_sweep_row(std::string& csv, const ResolvedExperiment& exp,
                      const EstimatorConfig& est, const ReplicationSummary& s) {
  csv += fmt(exp.params.sigma);
  csv += ',';
  csv += fmt(exp.lower);
  csv += ',';
  csv += fmt(exp.upper);
  csv += ',';
  csv += method_name(est.method);
  csv += ',';
  csv += std::to_string(s.n_runs);
  csv += ',';
  csv += fmt_opt(s.mean_p);
  csv += ',';
  csv += fmt_opt(s.cv_p);
  csv += ',';
  csv += fmt_opt(s.mean_price);
  csv += ',';
  csv += fmt_opt(s.cv_price);
  csv += ',';
  csv += fmt(s.mean_total_samples);
  csv += ',';
  csv += std::to_string(s.n_failures);
  csv += '\n';
}

/// Run the configured methods at one grid point, honouring the
/// equal-total-samples protocol: SubSim goes first and any plain MC method
/// inherits its realised mean sample count as the budget.
std::vector<ReplicationSummary> run_methods(const ResolvedExperiment& exp, std::size_t grid_idx,
                                            std::size_t workers) {
  std::vector<ReplicationSummary> out(exp.methods.size());
  std::optional<double> subsim_budget;
  for (std::size_t mi = 0; mi < exp.methods.size(); ++mi) {
    if (exp.methods[mi].method != Method::subsim) continue;
    out[mi] = replicate(exp.methods[mi], exp.params, exp.contract, exp.runs,
                        mix_seed(exp.seed, grid_idx, mi), workers, exp.reference_price);
    if (!subsim_budget) subsim_budget = out[mi].mean_total_samples;
  }
  for (std::size_t mi = 0; mi < exp.methods.size(); ++mi) {
    if (exp.methods[mi].method == Method::subsim) continue;
    EstimatorConfig est = exp.methods[mi];
    if (est.method == Method::mcs && subsim_budget && *subsim_budget >= 1.0) {
      est.mcs_samples = static_cast<std::size_t>(std::llround(*subsim_budget));
    }
    out[mi] = replicate(est, exp.params, exp.contract, exp.runs,
                        mix_seed(exp.seed, grid_idx, mi), workers, exp.reference_price);
  }
  return out;
}

ResolvedExperiment parse_at_grid_point(const std::string& config_json,
                                       const ExperimentOptions& options,
                                       const SweepSpec& sweep, double value) {
  ExperimentOptions opts = options;
  opts.overrides.emplace_back(sweep.parameter, fmt(value));
  return parse_experiment(config_json, opts);
}

}  // namespace

ResolvedExperiment parse_experiment(const std::string& config_json,
                                    const ExperimentOptions& options) {
  ojson root;
  try {
    root = ojson::parse(config_json);
  } catch (const std::exception& ex) {
    bad(std::string("invalid JSON: ") + ex.what());
  }
  if (!root.is_object()) bad("top level must be an object");

  for (const auto& [path, value_text] : options.overrides) {
    ojson value;
    try {
      value = ojson::parse(value_text);
    } catch (...) {
      value = value_text;  // plain strings pass through unquoted
    }
    set_by_path(root, path, value);
  }

  ResolvedExperiment exp;

  const ojson& model = member(root, "config", "model");
  exp.params.s0 = num_or(model, "model", "s0", exp.params.s0);
  exp.params.mu = num_or(model, "model", "mu", exp.params.mu);
  exp.params.sigma = num(model, "model", "sigma");
  exp.params.n_steps = count_or(model, "model", "n_steps", exp.params.n_steps);
  exp.params.maturity = num_or(model, "model", "maturity", exp.params.maturity);
  exp.params.validate();

  const ojson& contract = member(root, "config", "contract");
  exp.lower = num(contract, "contract", "lower");
  exp.upper = num(contract, "contract", "upper");
  const double strike = num(contract, "contract", "strike");
  const double rate = num_or(contract, "contract", "rate", 0.1);
  exp.contract = BarrierContract::constant(exp.lower, exp.upper, strike, rate,
                                           exp.params.maturity, exp.params.n_steps);
  exp.contract.validate();

  if (root.contains("methods")) {
    const ojson& ms = root.at("methods");
    if (!ms.is_array() || ms.empty()) bad("methods must be a non-empty array");
    for (std::size_t i = 0; i < ms.size(); ++i) {
      exp.methods.push_back(parse_method(ms[i], "methods[" + std::to_string(i) + "]"));
    }
  } else if (root.contains("method")) {
    exp.methods.push_back(parse_method(root.at("method"), "method"));
  } else {
    bad("a method or methods block is required");
  }

  exp.runs = options.runs ? *options.runs : count_or(root, "config", "runs", 100);
  if (exp.runs < 2) bad("runs must be >= 2");
  if (options.seed) {
    exp.seed = *options.seed;
  } else if (root.contains("seed")) {
    if (!root.at("seed").is_number_integer()) bad("seed must be an integer");
    exp.seed = root.at("seed").get<std::uint64_t>();
  }
  if (root.contains("reference_price")) {
    exp.reference_price = num(root, "config", "reference_price");
  }
  if (root.contains("sweep")) {
    const ojson& sw = root.at("sweep");
    SweepSpec spec;
    const ojson& par = member(sw, "sweep", "parameter");
    if (!par.is_string()) bad("sweep.parameter must be a string");
    spec.parameter = par.get<std::string>();
    const ojson& vals = member(sw, "sweep", "values");
    if (!vals.is_array() || vals.empty()) bad("sweep.values must be a non-empty array");
    for (const auto& v : vals) {
      if (!v.is_number()) bad("sweep.values entries must be numbers");
      spec.values.push_back(v.get<double>());
    }
    exp.sweep = std::move(spec);
  }

  ojson resolved;
  resolved["model"] = {{"s0", exp.params.s0},
                       {"mu", exp.params.mu},
                       {"sigma", exp.params.sigma},
                       {"n_steps", exp.params.n_steps},
                       {"maturity", exp.params.maturity}};
  resolved["contract"] = {{"lower", exp.lower},
                          {"upper", exp.upper},
                          {"strike", exp.contract.strike},
                          {"rate", exp.contract.rate}};
  ojson methods = ojson::array();
  for (const auto& est : exp.methods) methods.push_back(method_to_json(est));
  resolved["methods"] = std::move(methods);
  resolved["runs"] = exp.runs;
  resolved["seed"] = exp.seed;
  if (exp.reference_price) resolved["reference_price"] = *exp.reference_price;
  if (exp.sweep) {
    resolved["sweep"] = {{"parameter", exp.sweep->parameter}, {"values", exp.sweep->values}};
  }
  exp.resolved_json = resolved.dump(2);
  return exp;
}

PriceOutcome run_price(const std::string& config_json, const ExperimentOptions& options) {
  const ResolvedExperiment exp = parse_experiment(config_json, options);
  if (exp.methods.size() != 1) {
    bad("price expects exactly one method (use sweep or compare for several)");
  }

  PriceOutcome out;
  ojson rec;
  rec["build_id"] = build_id();
  rec["seed"] = exp.seed;
  rec["config"] = ojson::parse(exp.resolved_json);
  try {
    const ReplicationSummary s = replicate(exp.methods[0], exp.params, exp.contract, exp.runs,
                                           mix_seed(exp.seed, 0, 0), options.workers,
                                           exp.reference_price);
    rec["status"] = "ok";
    ojson result;
    result["method"] = method_name(exp.methods[0].method);
    result["runs"] = s.n_runs;
    result["failures"] = s.n_failures;
    result["p_hat_mean"] = s.mean_p ? ojson(*s.mean_p) : ojson(nullptr);
    result["p_hat_cv"] = s.cv_p ? ojson(*s.cv_p) : ojson(nullptr);
    result["price_mean"] = s.mean_price ? ojson(*s.mean_price) : ojson(nullptr);
    result["price_cv"] = s.cv_price ? ojson(*s.cv_price) : ojson(nullptr);
    result["mse_price"] = s.mse_price ? ojson(*s.mse_price) : ojson(nullptr);
    result["bias_price"] = s.bias_price ? ojson(*s.bias_price) : ojson(nullptr);
    result["mean_total_samples"] = s.mean_total_samples;
    rec["result"] = std::move(result);

    char line[512];
    std::snprintf(line, sizeof(line),
                  "%s: p_hat %s (cv %s)  price %s (cv %s)  mean total samples %.6g  runs %zu  "
                  "failures %zu",
                  method_name(exp.methods[0].method).c_str(),
                  (s.mean_p ? fmt(*s.mean_p) : "n/a").c_str(),
                  (s.cv_p ? fmt(*s.cv_p) : "n/a").c_str(),
                  (s.mean_price ? fmt(*s.mean_price) : "n/a").c_str(),
                  (s.cv_price ? fmt(*s.cv_price) : "n/a").c_str(), s.mean_total_samples,
                  s.n_runs, s.n_failures);
    out.line = line;
    out.ok = true;
  } catch (const NonConvergenceError& ex) {
    rec["status"] = "non_convergence";
    rec["error"] = ex.what();
    out.line = std::string("non-convergence: ") + ex.what();
    out.ok = false;
  }
  out.json = rec.dump(2) + "\n";
  return out;
}

std::string run_sweep(const std::string& config_json, const ExperimentOptions& options) {
  const ResolvedExperiment base = parse_experiment(config_json, options);
  if (!base.sweep) bad("sweep requires a sweep block");

  std::string csv = kSweepHeader;
  for (std::size_t gi = 0; gi < base.sweep->values.size(); ++gi) {
    const ResolvedExperiment exp =
        parse_at_grid_point(config_json, options, *base.sweep, base.sweep->values[gi]);
    const auto summaries = run_methods(exp, gi, options.workers);
    for (std::size_t mi = 0; mi < exp.methods.size(); ++mi) {
      append_sweep_row(csv, exp, exp.methods[mi], summaries[mi]);
    }
  }
  return csv;
}

std::string run_compare(const std::string& config_json, const ExperimentOptions& options) {
  const ResolvedExperiment base = parse_experiment(config_json, options);
  if (base.methods.size() < 2) bad("compare requires at least two methods");

  std::vector<double> grid;
  if (base.sweep) {
    grid = base.sweep->values;
  } else {
    grid.push_back(base.params.sigma);
  }

  std::string csv =
      "sigma,lower,upper,method_1,method_2,runs,p_hat_cv_ratio,price_cv_ratio,"
      "mean_total_samples_1,mean_total_samples_2\n";
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const ResolvedExperiment exp =
        base.sweep ? parse_at_grid_point(config_json, options, *base.sweep, grid[gi]) : base;
    const auto summaries = run_methods(exp, gi, options.workers);
    const ReplicationSummary& a = summaries[0];
    const ReplicationSummary& b = summaries[1];
    std::optional<double> p_ratio, price_ratio;
    if (a.cv_p && b.cv_p && *b.cv_p > 0.0) p_ratio = *a.cv_p / *b.cv_p;
    if (a.cv_price && b.cv_price && *b.cv_price > 0.0) price_ratio = *a.cv_price / *b.cv_price;
    csv += fmt(exp.params.sigma);
    csv += ',';
    csv += fmt(exp.lower);
    csv += ',';
    csv += fmt(exp.upper);
    csv += ',';
    csv += method_name(exp.methods[0].method);
    csv += ',';
    csv += method_name(exp.methods[1].method);
    csv += ',';
    csv += std::to_string(exp.runs);
    csv += ',';
    csv += fmt_opt(p_ratio);
    csv += ',';
    csv += fmt_opt(price_ratio);
    csv += ',';
    csv += fmt(a.mean_total_samples);
    csv += ',';
    csv += fmt(b.mean_total_samples);
    csv += '\n';
  }
  return csv;
}

std::string build_id() { return std::string("rarebar 0.1.0 (") + RB_BUILD_ID + ")"; }

}  // namespace rarebar
