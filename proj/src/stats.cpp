#include "rarebar/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "rarebar/errors.hpp"

namespace rarebar {

namespace {

constexpr std::uint64_t kRunKey = 0x72756e73ULL;  // "runs"

RunRecord one_run(const EstimatorConfig& estimator, const GbmParams& params,
                  const BarrierContract& contract, std::size_t run_index,
                  const RngStream& root) {
  RunRecord rec;
  rec.run_index = run_index;
  RngStream rng = root.substream(kRunKey, run_index);
  try {
    switch (estimator.method) {
      case Method::mcs: {
        const McEstimate e = estimate_mcs(params, contract, estimator.mcs_samples, rng);
        rec.p_hat = e.p_hat;
        rec.price_hat = e.price_hat;
        rec.total_samples = static_cast<double>(e.total_samples);
        break;
      }
      case Method::subsim: {
        const SubSimResult r = run_subsim(params, contract, estimator.subsim, rng);
        rec.p_hat = r.p_hat;
        rec.price_hat = r.price_hat;
        rec.total_samples = static_cast<double>(r.total_samples_used);
        break;
      }
      case Method::mlmc: {
        const MlmcResult r = run_mlmc(params, contract, estimator.mlmc, rng);
        rec.p_hat = std::numeric_limits<double>::quiet_NaN();
        rec.price_hat = r.price_hat;
        rec.total_samples = r.total_cost;
        break;
      }
    }
    rec.ok = true;
  } catch (const std::exception& ex) {
    rec.ok = false;
    rec.error = ex.what();
  }
  return rec;
}

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // n-1 denominator
};

Moments moments_of(const std::vector<double>& v) {
  Moments m;
  m.n = v.size();
  if (m.n == 0) return m;
  double sum = 0.0;
  for (double x : v) sum += x;
  m.mean = sum / static_cast<double>(m.n);
  if (m.n >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(m.n - 1));
  }
  return m;
}

std::optional<double> cv_of(const Moments& m) {
  if (m.n < 2 || m.mean == 0.0) return std::nullopt;
  return m.sd / std::abs(m.mean);
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::mcs: return "mcs";
    case Method::subsim: return "subsim";
    case Method::mlmc: return "mlmc";
  }
  throw std::logic_error("method_name: unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "mcs") return Method::mcs;
  if (name == "subsim") return Method::subsim;
  if (name == "mlmc") return Method::mlmc;
  throw std::invalid_argument("unknown method '" + name + "' (expected mcs, subsim or mlmc)");
}

ReplicationSummary replicate(const EstimatorConfig& estimator, const GbmParams& params,
                             const BarrierContract& contract, std::size_t n_runs,
                             std::uint64_t master_seed, std::size_t workers,
                             std::optional<double> price_reference) {
  if (n_runs < 2) throw std::invalid_argument("replicate: n_runs must be >= 2");
  if (workers < 1) workers = 1;

  const RngStream root(master_seed);
  std::vector<RunRecord> records(n_runs);

  if (workers == 1 || n_runs == 1) {
    for (std::size_t i = 0; i < n_runs; ++i) {
      records[i] = one_run(estimator, params, contract, i, root);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_runs) return;
        records[i] = one_run(estimator, params, contract, i, root);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min(workers, n_runs);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ReplicationSummary summary;
  summary.n_runs = n_runs;
  std::vector<double> ps, prices;
  double cost_sum = 0.0;
  std::size_t cost_n = 0;
  for (const RunRecord& rec : records) {
    if (!rec.ok) {
      ++summary.n_failures;
      continue;
    }
    if (!std::isnan(rec.p_hat)) ps.push_back(rec.p_hat);
    prices.push_back(rec.price_hat);
    cost_sum += rec.total_samples;
    ++cost_n;
  }
  if (summary.n_failures * 20 > n_runs) {
    throw NonConvergenceError("replicate: " + std::to_string(summary.n_failures) + " of " +
                              std::to_string(n_runs) +
                              " runs failed (above the 5% tolerance); first error: " +
                              [&]() -> std::string {
                                for (const auto& r : records)
                                  if (!r.ok) return r.error;
                                return "";
                              }());
  }

  const Moments mp = moments_of(ps);
  const Moments mq = moments_of(prices);
  if (!ps.empty()) summary.mean_p = mp.mean;
  summary.cv_p = cv_of(mp);
  if (!prices.empty()) summary.mean_price = mq.mean;
  summary.cv_price = cv_of(mq);
  if (price_reference && !prices.empty()) {
    summary.mse_price = mse(prices, *price_reference);
    summary.bias_price = mq.mean - *price_reference;
  }
  summary.mean_total_samples = cost_n > 0 ? cost_sum / static_cast<double>(cost_n) : 0.0;
  summary.records = std::move(records);
  return summary;
}

double mse(const std::vector<double>& values, double reference) {
  if (values.empty()) throw std::invalid_argument("mse: requires at least one value");
  if (!std::isfinite(reference)) throw std::invalid_argument("mse: reference must be finite");
  double sum = 0.0;
  for (double v : values) sum += (v - reference) * (v - reference);
  return sum / static_cast<double>(values.size());
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_loglog: requires matched vectors of length >= 2");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("fit_loglog: data must be strictly positive");
    }
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw std::invalid_argument("fit_loglog: zero spread in x");
  LogLogFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

ComplexityParams fit_complexity(const std::vector<double>& p_values,
                                const std::vector<double>& series, ComplexityMode mode) {
  if (p_values.size() != series.size()) {
    throw std::invalid_argument("fit_complexity: mismatched vector lengths");
  }
  std::vector<double> x;
  x.reserve(p_values.size());
  for (double p : p_values) {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::invalid_argument("fit_complexity: probabilities must lie in (0,1)");
    }
    x.push_back(std::abs(std::log(p)));
  }
  std::vector<double> distinct = x;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 4) {
    throw std::invalid_argument("fit_complexity: requires at least 4 distinct probabilities");
  }

  const LogLogFit fit = fit_loglog(x, series);
  ComplexityParams out;
  if (mode == ComplexityMode::mse) {
    out.k_exp = -fit.slope;
    out.c1 = std::exp(fit.intercept);
  } else {
    out.r_exp = fit.slope;
    out.c2 = std::exp(fit.intercept);
  }
  return out;
}

std::vector<CvRatioRow> cv_ratio_table(const std::vector<double>& grid,
                                       const std::vector<ReplicationSummary>& method1,
                                       const std::vector<ReplicationSummary>& method2) {
  if (grid.size() != method1.size() || grid.size() != method2.size()) {
    throw std::invalid_argument("cv_ratio_table: grid and summaries must align");
  }
  std::vector<CvRatioRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CvRatioRow row;
    row.grid_value = grid[i];
    if (method1[i].cv_p && method2[i].cv_p && *method2[i].cv_p > 0.0) {
      row.p_ratio = *method1[i].cv_p / *method2[i].cv_p;
    }
    if (method1[i].cv_price && method2[i].cv_price && *method2[i].cv_price > 0.0) {
      row.price_ratio = *method1[i].cv_price / *method2[i].cv_price;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rarebar
