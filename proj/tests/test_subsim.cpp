#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rarebar/mcs.hpp"
#include "rarebar/subsim.hpp"

using namespace rarebar;

namespace {

GbmParams make_params(double sigma, std::size_t n, double mu = 0.1) {
  GbmParams p;
  p.s0 = 100.0;
  p.mu = mu;
  p.sigma = sigma;
  p.n_steps = n;
  p.maturity = 1.0;
  return p;
}

SubSimConfig make_config(std::size_t m, double beta) {
  SubSimConfig cfg;
  cfg.m = m;
  cfg.beta = beta;
  return cfg;
}

}  // namespace

TEST_CASE("config invariants") {
  CHECK_NOTHROW(make_config(50000, 0.1).validate());
  CHECK_NOTHROW(make_config(6, 1.0 / 3.0).validate());
  CHECK_THROWS_AS(make_config(1000, 0.1234).validate(), std::invalid_argument);  // 1/beta
  CHECK_THROWS_AS(make_config(1001, 0.1).validate(), std::invalid_argument);     // beta*m
  CHECK_THROWS_AS(make_config(1000, 0.0).validate(), std::invalid_argument);
  SubSimConfig cfg = make_config(1000, 0.1);
  cfg.max_levels = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(make_config(1000, 0.1).seeds_per_level() == 100);
  CHECK(make_config(1000, 0.1).chain_length() == 10);
}

TEST_CASE("alpha_threshold") {
  CHECK(alpha_threshold({-1, -2, -3, -4, -5, -6}, 1.0 / 3.0, 6) == doctest::Approx(-2.5));
  CHECK(alpha_threshold(std::vector<double>(10, -7.0), 0.1, 10) == doctest::Approx(-7.0));
  CHECK(alpha_threshold({-1, -2, -2, -2, -5, -6}, 1.0 / 3.0, 6) == doctest::Approx(-2.0));
  CHECK_THROWS_AS(alpha_threshold({-1, -2, -3}, 0.1, 6), std::invalid_argument);
  CHECK_THROWS_AS(alpha_threshold({-1, -2, -3}, 1.0, 3), std::invalid_argument);  // beta*m+1 > m
}

TEST_CASE("total_samples") {
  CHECK(total_samples(100, 0.1, 1) == 100);
  CHECK(total_samples(50000, 0.1, 5) == 230000);
  CHECK(total_samples(6, 1.0 / 3.0, 2) == 10);
  CHECK_THROWS_AS(total_samples(100, 0.1, 0), std::invalid_argument);
}

TEST_CASE("theoretical CV") {
  // at p = beta with one level's worth of samples the formula collapses to the MCS CV
  for (double d : {2.0, 2.5, 3.0}) {
    CHECK(subsim_theoretical_cv(0.1, 1000.0, 0.1, 0.0, d) ==
          doctest::Approx(std::sqrt(0.9 / (1000.0 * 0.1))).epsilon(1e-12));
  }
  CHECK(subsim_theoretical_cv(1e-6, 3.25e5, 0.1, 0.0, 2.0) ==
        doctest::Approx(0.03157408869505305173).epsilon(1e-13));
  CHECK(subsim_theoretical_cv(1e-4, 1e5, 0.1, 0.0, 2.0) <
        subsim_theoretical_cv(1e-6, 1e5, 0.1, 0.0, 2.0));
  CHECK_THROWS_AS(subsim_theoretical_cv(0.0, 1e5, 0.1, 0.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(subsim_theoretical_cv(1.0, 1e5, 0.1, 0.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(subsim_theoretical_cv(0.5, 1e5, 0.1, 0.0, 4.0), std::invalid_argument);
}

TEST_CASE("high-probability regime degenerates to one plain MC level") {
  const GbmParams p = make_params(0.2, 50);
  const auto wide = BarrierContract::constant(1.0, 1e6, 100.0, 0.1, 1.0, 50);
  RngStream rng(11, 0);
  const SubSimResult r = run_subsim(p, wide, make_config(2000, 0.1), rng);
  CHECK(r.n_levels == 1);
  CHECK(r.p_hat == doctest::Approx(static_cast<double>(r.m_event) / 2000.0));
  CHECK(r.m_star == r.m_event);
  CHECK(r.total_samples_used == 2000);
  CHECK(r.p_hat > 0.4);
  CHECK(r.p_hat <= 1.0);
  CHECK(r.price_hat > 0.0);
}

TEST_CASE("rare-event run satisfies the structural invariants") {
  const GbmParams p = make_params(0.3, 250);
  const auto con = BarrierContract::constant(90.0, 110.0, 100.0, 0.1, 1.0, 250);
  RngStream rng(12, 0);
  const SubSimResult r = run_subsim(p, con, make_config(2000, 0.1), rng);
  CHECK(r.n_levels > 1);
  CHECK(r.p_hat > 0.0);
  CHECK(r.p_hat < 1e-2);
  CHECK(r.m_event >= 200);
  CHECK(r.total_samples_used == total_samples(2000, 0.1, r.n_levels));
  CHECK(r.p_hat == doctest::Approx(std::pow(0.1, static_cast<double>(r.n_levels - 1)) *
                                   static_cast<double>(r.m_event) / 2000.0));
  double prev = -1e300;
  for (std::size_t i = 0; i + 1 < r.levels.size(); ++i) {
    CHECK(r.levels[i].alpha > prev);
    CHECK(r.levels[i].alpha <= 0.0);
    prev = r.levels[i].alpha;
  }
  CHECK(r.expected_terminal >= con.strike);
  const double want_price =
      std::exp(-0.1) * r.p_hat * (r.expected_terminal - con.strike);
  CHECK(r.price_hat == doctest::Approx(want_price).epsilon(1e-12));
}

TEST_CASE("single-date rare event matches the closed form across replications") {
  // strike deep in the tail so p is ~1e-5
  const GbmParams p = make_params(0.2, 1, 0.0);
  const auto con = BarrierContract::constant(1.0, 1e6, 235.0, 0.0, 1.0, 1);
  const double p_true = oracles::single_date_event_prob(100.0, 0.0, 0.2, 1.0, 1.0, 1e6, 235.0);
  REQUIRE(p_true > 1e-6);
  REQUIRE(p_true < 1e-4);

  const RngStream root(13, 0);
  const std::size_t runs = 50;
  std::vector<double> ps(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    RngStream rng = root.substream(1, i);
    ps[i] = run_subsim(p, con, make_config(1000, 0.1), rng).p_hat;
  }
  double mean = 0.0;
  for (double v : ps) mean += v;
  mean /= static_cast<double>(runs);
  double var = 0.0;
  for (double v : ps) var += (v - mean) * (v - mean);
  var /= static_cast<double>(runs - 1);
  const double se = std::sqrt(var / static_cast<double>(runs));
  CHECK(std::abs(mean - p_true) < 3.0 * se);
}

TEST_CASE("non-convergence carries the completed levels") {
  const GbmParams p = make_params(0.3, 250);
  const auto con = BarrierContract::constant(90.0, 110.0, 100.0, 0.1, 1.0, 250);
  SubSimConfig cfg = make_config(1000, 0.1);
  cfg.max_levels = 1;
  RngStream rng(14, 0);
  try {
    run_subsim(p, con, cfg, rng);
    FAIL("expected SubSimNonConvergence");
  } catch (const SubSimNonConvergence& ex) {
    CHECK(ex.levels.size() == 1);
    CHECK(ex.levels[0].alpha < 0.0);
  }
}

TEST_CASE("flat performance landscape raises stagnation") {
  // sigma = 0: every path identical, thresholds cannot increase
  const GbmParams p = make_params(0.0, 50);
  const auto con = BarrierContract::constant(90.0, 200.0, 150.0, 0.1, 1.0, 50);
  CHECK_THROWS_AS(
      [&] {
        RngStream rng(15, 0);
        run_subsim(p, con, make_config(100, 0.1), rng);
      }(),
      StagnationError);
}
