#pragma once

// Shared independent oracles for the test suite: closed-form lognormal
// probabilities and partial expectations, KS statistics, and a truncated
// normal rejection sampler. Everything here is deliberately written from
// the defining formulas, not from the library implementation.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rarebar/rng.hpp"

namespace oracles {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(a <= S <= b) for S = s0 exp((mu - sigma^2/2) t + sigma sqrt(t) Z).
inline double lognormal_interval_prob(double s0, double mu, double sigma, double t, double a,
                                      double b) {
  const double m = (mu - 0.5 * sigma * sigma) * t;
  const double v = sigma * std::sqrt(t);
  const auto q = [&](double x) { return (std::log(x / s0) - m) / v; };
  return normal_cdf(q(b)) - normal_cdf(q(a));
}

/// Execution probability for a single monitoring date: survive (L, U) and
/// finish at or above the strike.
inline double single_date_event_prob(double s0, double mu, double sigma, double t, double lower,
                                     double upper, double strike) {
  return lognormal_interval_prob(s0, mu, sigma, t, std::max(lower, strike), upper);
}

/// E[S 1{a <= S <= b}] for the same lognormal.
inline double lognormal_partial_mean(double s0, double mu, double sigma, double t, double a,
                                     double b) {
  const double m = (mu - 0.5 * sigma * sigma) * t;
  const double v = sigma * std::sqrt(t);
  const auto q = [&](double x) { return (std::log(x / s0) - m) / v; };
  return s0 * std::exp(mu * t) * (normal_cdf(q(b) - v) - normal_cdf(q(a) - v));
}

/// One-sample KS statistic against a CDF functor; data need not be sorted.
template <typename Cdf>
double ks_statistic(std::vector<double> data, Cdf cdf) {
  if (data.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(data.begin(), data.end());
  const auto n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

/// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic KS critical value at the 1% level: c(0.01) = 1.62762...
inline constexpr double kKsCoeff1pct = 1.6276236307187668;

inline double ks_critical_one_sample(std::size_t n) {
  return kKsCoeff1pct / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(std::size_t n, std::size_t m) {
  return kKsCoeff1pct * std::sqrt((static_cast<double>(n) + static_cast<double>(m)) /
                                  (static_cast<double>(n) * static_cast<double>(m)));
}

/// Exact sampler for Z ~ N(0,1) conditioned on Z >= cut, by rejection from
/// the unconditioned normal (fine for moderate cuts).
inline double truncated_normal_draw(double cut, rarebar::RngStream& rng) {
  for (;;) {
    const double z = rng.normal();
    if (z >= cut) return z;
  }
}

}  // namespace oracles
