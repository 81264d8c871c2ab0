#include "rarebar/validate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "rarebar/contract.hpp"
#include "rarebar/mcs.hpp"
#include "rarebar/mlmc.hpp"
#include "rarebar/mma.hpp"
#include "rarebar/model.hpp"
#include "rarebar/stats.hpp"
#include "rarebar/subsim.hpp"

namespace rarebar {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Collects check outcomes for one suite; the first failure wins the detail slot.
struct Checker {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
  void expect_near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    expect(std::abs(got - want) <= tol, os.str());
  }
};

double ks_statistic_normal(std::vector<double> draws) {
  std::sort(draws.begin(), draws.end());
  const auto n = static_cast<double>(draws.size());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = normal_cdf(draws[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

GbmParams standard_params(double sigma, std::size_t n = 250) {
  GbmParams p;
  p.s0 = 100.0;
  p.mu = 0.1;
  p.sigma = sigma;
  p.n_steps = n;
  p.maturity = 1.0;
  return p;
}

void suite_model(Checker& c) {
  // deterministic paths
  GbmParams p = standard_params(0.0, 10);
  const PricePath flat = evolve(p, NormalVector(10, 3.7));
  for (std::size_t n = 1; n <= 10; ++n) {
    const double want = 100.0 * std::exp(0.1 * static_cast<double>(n) * p.dt());
    c.expect(std::abs(flat.s[n - 1] - want) <= 1e-10 * want, "sigma=0 path mismatch");
  }
  p = standard_params(0.2, 8);
  const PricePath drift = evolve(p, NormalVector(8, 0.0));
  for (std::size_t n = 1; n <= 8; ++n) {
    const double want = 100.0 * std::exp((0.1 - 0.02) * static_cast<double>(n) * p.dt());
    c.expect(std::abs(drift.s[n - 1] - want) <= 1e-10 * want, "zero-z path mismatch");
  }

  // normal sampler moments and distribution
  RngStream rng(20260823, 1);
  const std::size_t n_draws = 20000;
  NormalVector draws = sample_normal_vector(n_draws, rng);
  double mean = 0.0, var = 0.0;
  for (double z : draws) mean += z;
  mean /= static_cast<double>(n_draws);
  for (double z : draws) var += (z - mean) * (z - mean);
  var /= static_cast<double>(n_draws - 1);
  c.expect_near(mean, 0.0, 3.0 / std::sqrt(static_cast<double>(n_draws)), "normal sample mean");
  c.expect_near(var, 1.0, 4.0 / std::sqrt(static_cast<double>(n_draws)), "normal sample variance");
  const double ks = ks_statistic_normal(draws);
  const double crit = 1.6276236307187668 / std::sqrt(static_cast<double>(n_draws));
  c.expect(ks < crit, "normal sampler KS statistic above the 1% critical value");

  // determinism across stream reconstruction
  RngStream a(7, 42), b(7, 42);
  for (int i = 0; i < 100; ++i) c.expect(a.next_u64() == b.next_u64(), "stream not reproducible");
}

void suite_contract(Checker& c) {
  const auto con = BarrierContract::constant(90.0, 110.0, 100.0, 0.1, 1.0, 3);
  c.expect_near(performance(con, PricePath{100.0, {105.0, 115.0, 108.0}}), -5.0, 1e-12,
                "upper breach penalty");
  c.expect_near(performance(con, PricePath{100.0, {105.0, 108.0, 95.0}}), -5.0, 1e-12,
                "terminal strike penalty");
  c.expect(in_event(con, PricePath{100.0, {105.0, 108.0, 100.0}}), "S_N = K must execute");
  c.expect(in_event(con, PricePath{100.0, {110.0, 90.0, 104.0}}), "barrier touch must survive");
  c.expect_near(discount(1.0, 0.1, 1.0), 0.90483741803595957316, 1e-15, "discount factor");

  // payoff identity and evaluator agreement on random paths
  const GbmParams p = standard_params(0.3, 25);
  const auto con25 = BarrierContract::constant(90.0, 110.0, 100.0, 0.1, 1.0, 25);
  const PathEvaluator eval(p, con25);
  RngStream rng(99, 0);
  for (int i = 0; i < 2000; ++i) {
    const NormalVector z = sample_normal_vector(25, rng);
    const PricePath path = evolve(p, z);
    const double g = performance(con25, path);
    const double direct = payoff(con25, path);
    const double indicator = std::max(path.terminal() - 100.0, 0.0) * (g == 0.0 ? 1.0 : 0.0);
    c.expect(direct == indicator, "payoff identity broken");
    const PathEval e = eval(z);
    c.expect(std::abs(e.g - g) <= 1e-9 * (1.0 + std::abs(g)), "fused evaluator disagrees on g");
    c.expect(std::abs(e.terminal - path.terminal()) <= 1e-9 * path.terminal(),
             "fused evaluator disagrees on S_N");

    // widening the barriers never decreases g
    const auto wide = BarrierContract::constant(80.0, 120.0, 100.0, 0.1, 1.0, 25);
    c.expect(performance(wide, path) >= g, "barrier-widening monotonicity broken");
  }
}

void suite_mma(Checker& c) {
  c.expect(mma_component_acceptance(2.0, 1.0) == 1.0, "inward proposal must be certain");
  c.expect_near(mma_component_acceptance(1.0, 2.0), std::exp(-1.5), 1e-15,
                "outward acceptance ratio");

  const GbmParams p = standard_params(0.3, 50);
  const auto con = BarrierContract::constant(90.0, 110.0, 100.0, 0.1, 1.0, 50);
  RngStream rng(5150, 0);
  for (int rep = 0; rep < 50; ++rep) {
    RngStream chain_rng = rng.substream(1, rep);
    const NormalVector seed = sample_normal_vector(50, chain_rng);
    const PathEvaluator eval(p, con);
    const double g0 = eval(seed).g;
    const auto chain = run_chain(seed, 20, g0, con, p, MmaProposal{0.5}, chain_rng);
    c.expect(chain.size() == 20, "chain length mismatch");
    for (const auto& state : chain) {
      c.expect(state.g >= g0, "chain state escaped the level event");
    }
  }
}

void suite_subsim(Checker& c) {
  c.expect_near(alpha_threshold({-1, -2, -3, -4, -5, -6}, 1.0 / 3.0, 6), -2.5, 1e-12,
                "threshold midpoint");
  c.expect(total_samples(50000, 0.1, 5) == 230000, "total-sample formula");
  c.expect(total_samples(6, 1.0 / 3.0, 2) == 10, "total-sample formula (small)");

  // degenerate high-probability case: one level, matches a plain MC count
  {
    SubSimConfig cfg;
    cfg.m = 1000;
    cfg.beta = 0.1;
    const GbmParams p = standard_params(0.2, 50);
    const auto wide = BarrierContract::constant(1.0, 1e6, 100.0, 0.1, 1.0, 50);
    RngStream rng(31, 0);
    const SubSimResult r = run_subsim(p, wide, cfg, rng);
    c.expect(r.n_levels == 1, "wide-barrier run should stop at level 1");
    c.expect(r.p_hat > 0.4 && r.p_hat <= 1.0, "wide-barrier p_hat out of range");
    c.expect(r.total_samples_used == 1000, "level-1 sample accounting");
  }

  // rare-event run: thresholds increase, estimate lands in a sane band
  {
    SubSimConfig cfg;
    cfg.m = 2000;
    cfg.beta = 0.1;
    const GbmParams p = standard_params(0.30, 250);
    const auto con = BarrierContract::constant(90.0, 110.0, 100.0, 0.1, 1.0, 250);
    RngStream rng(77, 0);
    const SubSimResult r = run_subsim(p, con, cfg, rng);
    c.expect(r.p_hat > 0.0 && r.p_hat < 1e-2, "rare-event p_hat out of range");
    c.expect(r.m_event >= cfg.seeds_per_level(), "stopping rule violated");
    c.expect(r.total_samples_used == total_samples(cfg.m, cfg.beta, r.n_levels),
             "sample accounting mismatch");
    double prev = -1e300;
    for (std::size_t i = 0; i + 1 < r.levels.size(); ++i) {
      c.expect(r.levels[i].alpha > prev, "thresholds must increase strictly");
      c.expect(r.levels[i].alpha <= 0.0, "thresholds must stay nonpositive");
      prev = r.levels[i].alpha;
    }
  }
}

void suite_bridge(Checker& c) {
  c.expect_near(bridge_maximum_from_uniform(100.0, 104.0, 15.0, 0.01, 1.0), 104.0, 1e-12,
                "X=1 maximum degenerates to the larger endpoint");
  c.expect_near(bridge_minimum_from_uniform(100.0, 104.0, 15.0, 0.01, 1.0), 100.0, 1e-12,
                "X=1 minimum degenerates to the smaller endpoint");

  struct Tuple {
    double s_i, s_ip1, b, h, upper, lower;
  };
  const Tuple tuples[] = {{100.0, 102.0, 20.0, 1.0 / 250.0, 105.0, 95.0},
                          {100.0, 100.0, 30.0, 1.0 / 50.0, 110.0, 90.0}};
  const std::size_t n_draws = 200000;
  RngStream rng(424242, 0);
  for (const Tuple& t : tuples) {
    const double b2h = t.b * t.b * t.h;
    const double p_up = std::exp(-2.0 * (t.upper - t.s_i) * (t.upper - t.s_ip1) / b2h);
    const double p_down = std::exp(-2.0 * (t.s_i - t.lower) * (t.s_ip1 - t.lower) / b2h);
    std::size_t hits_up = 0, hits_down = 0;
    for (std::size_t i = 0; i < n_draws; ++i) {
      if (sample_bridge_maximum(t.s_i, t.s_ip1, t.b, t.h, rng) > t.upper) ++hits_up;
      if (sample_bridge_minimum(t.s_i, t.s_ip1, t.b, t.h, rng) < t.lower) ++hits_down;
    }
    const auto check = [&](std::size_t hits, double p, const char* what) {
      const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_draws));
      c.expect_near(static_cast<double>(hits) / static_cast<double>(n_draws), p,
                    3.5 * se + 1e-12, what);
    };
    check(hits_up, p_up, "maximum crossing probability");
    check(hits_down, p_down, "minimum crossing probability");
  }
}

void suite_mlmc(Checker& c) {
  c.expect_near(survival_prob_fine(100.0, 100.0, 200.0, 1.0 / 250.0, 110.0, 90.0),
                0.50907540490351859452, 1e-12, "fine survival, b=200");
  c.expect(survival_prob_fine(100.0, 100.0, 20.0, 1.0 / 250.0, 110.0, 90.0) > 1.0 - 1e-15,
           "fine survival, b=20 should be ~1");
  c.expect(survival_prob_fine(110.0, 100.0, 20.0, 1.0 / 250.0, 110.0, 90.0) == 0.0,
           "endpoint on the barrier must kill the path");
  c.expect_near(survival_prob_coarse(100.0, 100.0, 100.0, 200.0, 1.0 / 250.0, 110.0, 90.0),
                0.25915776787768140387, 1e-12, "coarse survival, b=200");

  MlmcConfig cfg;
  cfg.n0 = 8;
  cfg.refine = 4;
  cfg.n_levels = 3;
  cfg.total_samples = 30000;
  cfg.pilot_samples = 200;
  const GbmParams p = standard_params(0.2, 250);
  const auto con = BarrierContract::constant(60.0, 140.0, 100.0, 0.1, 1.0, 250);
  RngStream rng(314159, 0);
  const MlmcResult r = run_mlmc(p, con, cfg, rng);
  c.expect(r.price_hat > 5.0 && r.price_hat < 20.0, "MLMC wide-barrier price out of band");
  c.expect(r.total_cost > 0.0, "cost accounting");
  c.expect(r.level_means.size() == 3, "level bookkeeping");
  c.expect(std::abs(r.level_means[2]) < std::abs(r.level_means[0]),
           "level corrections should shrink");
}

void suite_stats(Checker& c) {
  // mse identity against variance + bias^2
  const std::vector<double> vals = {1.0, 2.5, -0.5, 3.0, 1.5};
  const double ref = 1.2;
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(vals.size());
  double var_pop = 0.0;
  for (double v : vals) var_pop += (v - mean) * (v - mean);
  var_pop /= static_cast<double>(vals.size());
  const double bias = mean - ref;
  c.expect_near(mse(vals, ref), var_pop + bias * bias, 1e-14, "mse identity");

  // exact complexity-model recovery
  std::vector<double> ps = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> series;
  for (double p : ps) series.push_back(2.0 / std::pow(std::abs(std::log(p)), 3.0));
  const ComplexityParams fit = fit_complexity(ps, series, ComplexityMode::mse);
  c.expect(fit.k_exp.has_value(), "mse fit must set k");
  c.expect_near(*fit.k_exp, 3.0, 1e-9, "synthetic k recovery");
  c.expect_near(*fit.c1, 2.0, 1e-9, "synthetic constant recovery");

  // worker count must not change results
  EstimatorConfig est;
  est.method = Method::mcs;
  est.mcs_samples = 2000;
  const GbmParams p = standard_params(0.2, 50);
  const auto con = BarrierContract::constant(90.0, 110.0, 100.0, 0.1, 1.0, 50);
  const ReplicationSummary one = replicate(est, p, con, 10, 11, 1);
  const ReplicationSummary four = replicate(est, p, con, 10, 11, 4);
  c.expect(one.mean_p == four.mean_p && one.cv_price == four.cv_price,
           "replicate depends on worker count");
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    c.expect(one.records[i].p_hat == four.records[i].p_hat, "per-run records differ by workers");
  }
}

}  // namespace

std::vector<SuiteResult> run_validation(const std::string& suite_filter) {
  const std::pair<const char*, std::function<void(Checker&)>> suites[] = {
      {"model", suite_model},   {"contract", suite_contract}, {"mma", suite_mma},
      {"subsim", suite_subsim}, {"bridge", suite_bridge},     {"mlmc", suite_mlmc},
      {"stats", suite_stats},
  };

  std::vector<SuiteResult> results;
  bool matched = false;
  for (const auto& [name, fn] : suites) {
    if (!suite_filter.empty() && suite_filter != name) continue;
    matched = true;
    Checker c;
    try {
      fn(c);
    } catch (const std::exception& ex) {
      c.expect(false, std::string("exception: ") + ex.what());
    }
    results.push_back(SuiteResult{name, c.ok, c.detail});
  }
  if (!matched) {
    throw std::invalid_argument("unknown validation suite '" + suite_filter + "'");
  }
  return results;
}

}  // namespace rarebar
