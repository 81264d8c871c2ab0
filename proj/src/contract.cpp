#include "rarebar/contract.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rarebar {

BarrierContract BarrierContract::constant(double lower, double upper, double strike,
                                          double rate, double maturity, std::size_t n) {
  BarrierContract c;
  c.lower.assign(n, lower);
  c.upper.assign(n, upper);
  c.strike = strike;
  c.rate = rate;
  c.maturity = maturity;
  c.validate();
  return c;
}

void BarrierContract::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("BarrierContract: barrier vectors must be nonempty and equal length");
  }
  for (std::size_t n = 0; n < lower.size(); ++n) {
    if (!(lower[n] < upper[n])) {
      throw std::invalid_argument("BarrierContract: requires L_n < U_n at every date");
    }
  }
  if (!(strike > 0.0)) throw std::invalid_argument("BarrierContract: strike must be > 0");
  if (!(strike < upper.back())) {
    throw std::invalid_argument("BarrierContract: requires K < U_N");
  }
  if (!(maturity > 0.0)) throw std::invalid_argument("BarrierContract: maturity must be > 0");
}

double performance(const BarrierContract& contract, const PricePath& path) {
  const std::size_t n = contract.n_dates();
  if (path.size() != n) {
    throw std::invalid_argument("performance: path length must equal barrier vector length");
  }
  double g = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double s = path.s[i];
    if (s > contract.upper[i]) {
      g += contract.upper[i] - s;
    } else if (s < contract.lower[i]) {
      g += s - contract.lower[i];
    }
  }
  const double sN = path.s[n - 1];
  if (sN > contract.upper[n - 1]) {
    g += contract.upper[n - 1] - sN;
  } else if (sN < contract.strike) {
    g += sN - contract.strike;
  }
  return g;
}

bool in_event(const BarrierContract& contract, const PricePath& path) {
  return performance(contract, path) >= 0.0;
}

double payoff(const BarrierContract& contract, const PricePath& path) {
  return in_event(contract, path) ? path.terminal() - contract.strike : 0.0;
}

double discount(double value, double rate, double years) {
  if (years < 0.0) throw std::invalid_argument("discount: t must be >= 0");
  return value * std::exp(-rate * years);
}

PathEvaluator::PathEvaluator(const GbmParams& params, const BarrierContract& contract)
    : n_(params.n_steps) {
  params.validate();
  contract.validate();
  if (contract.n_dates() != n_) {
    throw std::invalid_argument("PathEvaluator: contract grid must match n_steps");
  }
  const double dt = params.dt();
  log_s0_ = std::log(params.s0);
  drift_ = (params.mu - 0.5 * params.sigma * params.sigma) * dt;
  vol_ = params.sigma * std::sqrt(dt);
  strike_ = contract.strike;
  log_strike_ = std::log(contract.strike);
  lower_ = contract.lower;
  upper_ = contract.upper;
  log_lower_.resize(n_);
  log_upper_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    log_lower_[i] = std::log(lower_[i]);
    log_upper_[i] = std::log(upper_[i]);
  }
  // S_0 itself is not monitored; flag an initial spot already outside the
  // first monitoring window, since the event is then unreachable in spirit.
  if (params.s0 < lower_[0] || params.s0 > upper_[0]) {
    std::fprintf(stderr,
                 "rarebar: warning: spot %.6g lies outside the first barrier window [%.6g, %.6g]\n",
                 params.s0, lower_[0], upper_[0]);
  }
}

PathEval PathEvaluator::operator()(std::span<const double> z) const {
  if (z.size() != n_) {
    throw std::invalid_argument("PathEvaluator: normal vector length must equal n_steps");
  }
  double logs = log_s0_;
  double g = 0.0;
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    logs += drift_ + vol_ * z[i];
    if (logs > log_upper_[i]) {
      g += upper_[i] - std::exp(logs);
    } else if (logs < log_lower_[i]) {
      g += std::exp(logs) - lower_[i];
    }
  }
  logs += drift_ + vol_ * z[n_ - 1];
  const double terminal = std::exp(logs);
  if (logs > log_upper_[n_ - 1]) {
    g += upper_[n_ - 1] - terminal;
  } else if (logs < log_strike_) {
    g += terminal - strike_;
  }
  return PathEval{g, terminal};
}

}  // namespace rarebar
