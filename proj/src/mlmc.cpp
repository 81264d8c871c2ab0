#include "rarebar/mlmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rarebar {

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

bool inside(double s, double lower, double upper) { return s > lower && s < upper; }

// Single one-barrier bridge non-crossing factor, clamped to [0,1].
double upper_factor(double s_a, double s_b, double b2h, double upper) {
  return clamp01(1.0 - std::exp(-2.0 * (upper - s_a) * (upper - s_b) / b2h));
}

double lower_factor(double s_a, double s_b, double b2h, double lower) {
  return clamp01(1.0 - std::exp(-2.0 * (s_a - lower) * (s_b - lower) / b2h));
}

double contract_payoff(double terminal, double strike, bool digital) {
  if (digital) return terminal >= strike ? 1.0 : 0.0;
  return std::max(terminal - strike, 0.0);
}

void require_constant_barriers(const BarrierContract& contract) {
  for (std::size_t i = 1; i < contract.n_dates(); ++i) {
    if (contract.lower[i] != contract.lower[0] || contract.upper[i] != contract.upper[0]) {
      throw std::invalid_argument("run_mlmc: requires constant barriers");
    }
  }
}

}  // namespace

void MlmcConfig::validate() const {
  if (n0 < 1) throw std::invalid_argument("MlmcConfig: n0 must be >= 1");
  if (refine < 2 || refine % 2 != 0) {
    throw std::invalid_argument("MlmcConfig: refine must be even and >= 2");
  }
  if (n_levels < 1) throw std::invalid_argument("MlmcConfig: n_levels must be >= 1");
  if (total_samples < 1) throw std::invalid_argument("MlmcConfig: total_samples must be >= 1");
  if (pilot_samples < 2) throw std::invalid_argument("MlmcConfig: pilot_samples must be >= 2");
  if (target_cv < 0.0) throw std::invalid_argument("MlmcConfig: target_cv must be >= 0");
}

double survival_prob_fine(double s_i, double s_ip1, double b, double h, double upper,
                          double lower) {
  if (!(h > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("survival_prob_fine: requires h > 0 and b > 0");
  }
  if (!(lower < upper)) throw std::invalid_argument("survival_prob_fine: requires L < U");
  if (!inside(s_i, lower, upper) || !inside(s_ip1, lower, upper)) return 0.0;
  const double b2h = b * b * h;
  return clamp01(upper_factor(s_i, s_ip1, b2h, upper) * lower_factor(s_i, s_ip1, b2h, lower));
}

double survival_prob_coarse(double s_i, double s_mid, double s_ip1, double b, double h,
                            double upper, double lower, bool half_step) {
  if (!(h > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("survival_prob_coarse: requires h > 0 and b > 0");
  }
  if (!(lower < upper)) throw std::invalid_argument("survival_prob_coarse: requires L < U");
  if (!inside(s_i, lower, upper) || !inside(s_mid, lower, upper) ||
      !inside(s_ip1, lower, upper)) {
    return 0.0;
  }
  const double b2h = b * b * h * (half_step ? 0.5 : 1.0);
  const double p = upper_factor(s_i, s_mid, b2h, upper) * upper_factor(s_mid, s_ip1, b2h, upper) *
                   lower_factor(s_i, s_mid, b2h, lower) * lower_factor(s_mid, s_ip1, b2h, lower);
  return clamp01(p);
}

double bridge_maximum_from_uniform(double s_i, double s_ip1, double b, double h, double x) {
  const double d = s_ip1 - s_i;
  return 0.5 * (s_i + s_ip1 + std::sqrt(d * d - 2.0 * b * b * h * std::log(x)));
}

double bridge_minimum_from_uniform(double s_i, double s_ip1, double b, double h, double x) {
  const double d = s_ip1 - s_i;
  return 0.5 * (s_i + s_ip1 - std::sqrt(d * d - 2.0 * b * b * h * std::log(x)));
}

double sample_bridge_maximum(double s_i, double s_ip1, double b, double h, RngStream& rng) {
  return bridge_maximum_from_uniform(s_i, s_ip1, b, h, rng.uniform_pos());
}

double sample_bridge_minimum(double s_i, double s_ip1, double b, double h, RngStream& rng) {
  return bridge_minimum_from_uniform(s_i, s_ip1, b, h, rng.uniform_pos());
}

LevelSample mlmc_level_sample(std::size_t level, const GbmParams& params,
                              const BarrierContract& contract, const MlmcConfig& config,
                              RngStream& rng) {
  const double lower = contract.lower[0];
  const double upper = contract.upper[0];
  // With zero diffusion the bridge degenerates; survival is the endpoint check.
  const auto surv_fine = [&](double s_a, double s_b, double b, double h) {
    if (b > 0.0) return survival_prob_fine(s_a, s_b, b, h, upper, lower);
    return inside(s_a, lower, upper) && inside(s_b, lower, upper) ? 1.0 : 0.0;
  };
  const auto surv_coarse = [&](double s_a, double s_m, double s_b, double b, double h) {
    if (b > 0.0) {
      return survival_prob_coarse(s_a, s_m, s_b, b, h, upper, lower, config.coarse_half_step);
    }
    return inside(s_a, lower, upper) && inside(s_m, lower, upper) && inside(s_b, lower, upper)
               ? 1.0
               : 0.0;
  };
  const double T = params.maturity;
  const double mu = params.mu;
  const double sigma = params.sigma;

  std::size_t n_fine = config.n0;
  for (std::size_t i = 0; i < level; ++i) n_fine *= config.refine;
  const double h_f = T / static_cast<double>(n_fine);
  const double sqrt_hf = std::sqrt(h_f);

  double sf = params.s0;
  double surv_f = 1.0;

  if (level == 0) {
    for (std::size_t i = 0; i < n_fine; ++i) {
      const double dw = sqrt_hf * rng.normal();
      const double s_next =
          sf * (1.0 + mu * h_f + sigma * dw + 0.5 * sigma * sigma * (dw * dw - h_f));
      surv_f *= surv_fine(sf, s_next, sigma * sf, h_f);
      sf = s_next;
    }
    return LevelSample{contract_payoff(sf, contract.strike, config.digital) * surv_f, 0.0};
  }

  const std::size_t n_coarse = n_fine / config.refine;
  const double h_c = T / static_cast<double>(n_coarse);
  const std::size_t half = config.refine / 2;

  double sc = params.s0;
  double surv_c = 1.0;

  for (std::size_t j = 0; j < n_coarse; ++j) {
    double dwc = 0.0;
    double dw_first_half = 0.0;
    for (std::size_t k = 0; k < config.refine; ++k) {
      const double dw = sqrt_hf * rng.normal();
      const double s_next =
          sf * (1.0 + mu * h_f + sigma * dw + 0.5 * sigma * sigma * (dw * dw - h_f));
      surv_f *= surv_fine(sf, s_next, sigma * sf, h_f);
      sf = s_next;
      dwc += dw;
      if (k < half) dw_first_half += dw;
    }
    const double b_c = sigma * sc;
    const double sc_next =
        sc * (1.0 + mu * h_c + sigma * dwc + 0.5 * sigma * sigma * (dwc * dwc - h_c));
    // Bridge-interpolated midpoint from the shared fine increments.
    const double s_mid = 0.5 * (sc + sc_next) + 0.5 * b_c * (dw_first_half - (dwc - dw_first_half));
    surv_c *= surv_coarse(sc, s_mid, sc_next, b_c, h_c);
    sc = sc_next;
  }

  return LevelSample{contract_payoff(sf, contract.strike, config.digital) * surv_f,
                     contract_payoff(sc, contract.strike, config.digital) * surv_c};
}

namespace {

struct LevelStats {
  std::size_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double y) {
    ++n;
    sum += y;
    sum_sq += y * y;
  }
  double mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  double variance() const {
    if (n < 2) return 0.0;
    const double mu = mean();
    const double v = (sum_sq - static_cast<double>(n) * mu * mu) / static_cast<double>(n - 1);
    return std::max(v, 0.0);
  }
};

MlmcResult assemble(const std::vector<LevelStats>& stats, const std::vector<double>& cost_per,
                    const BarrierContract& contract, bool digital) {
  MlmcResult res;
  double sum_means = 0.0;
  double var_of_sum = 0.0;
  res.total_cost = 0.0;
  for (std::size_t l = 0; l < stats.size(); ++l) {
    res.level_means.push_back(stats[l].mean());
    res.level_vars.push_back(stats[l].variance());
    res.level_samples.push_back(stats[l].n);
    sum_means += stats[l].mean();
    var_of_sum += stats[l].variance() / static_cast<double>(stats[l].n);
    res.total_cost += static_cast<double>(stats[l].n) * cost_per[l];
  }
  const double discounted = digital ? sum_means
                                    : discount(sum_means, contract.rate, contract.maturity);
  res.price_hat = discounted;
  res.cv_hat = sum_means != 0.0 ? std::sqrt(var_of_sum) / std::abs(sum_means) : 0.0;
  return res;
}

}  // namespace

MlmcResult run_mlmc(const GbmParams& params, const BarrierContract& contract,
                    const MlmcConfig& config, RngStream& rng) {
  params.validate();
  contract.validate();
  config.validate();
  require_constant_barriers(contract);

  const std::size_t n_levels = config.n_levels;
  std::vector<LevelStats> stats(n_levels);
  std::vector<double> cost_per(n_levels);
  std::vector<RngStream> streams;
  streams.reserve(n_levels);
  std::size_t steps = config.n0;
  for (std::size_t l = 0; l < n_levels; ++l) {
    cost_per[l] = static_cast<double>(steps) + (l > 0 ? static_cast<double>(steps / config.refine) : 0.0);
    streams.push_back(rng.substream(0x6d6c6d63ULL, l));
    steps *= config.refine;
  }

  auto draw = [&](std::size_t l, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      const LevelSample s = mlmc_level_sample(l, params, contract, config, streams[l]);
      stats[l].add(s.fine_payoff - s.coarse_payoff);
    }
  };

  const std::size_t pilot = std::min(config.pilot_samples,
                                     std::max<std::size_t>(2, config.total_samples / n_levels));
  for (std::size_t l = 0; l < n_levels; ++l) draw(l, pilot);

  auto allocate = [&](std::size_t budget) {
    // N_l proportional to sqrt(V_l / C_l)
    std::vector<double> w(n_levels);
    double wsum = 0.0;
    for (std::size_t l = 0; l < n_levels; ++l) {
      w[l] = std::sqrt(std::max(stats[l].variance(), 1e-300) / cost_per[l]);
      wsum += w[l];
    }
    std::vector<std::size_t> target(n_levels);
    for (std::size_t l = 0; l < n_levels; ++l) {
      target[l] = static_cast<std::size_t>(std::floor(static_cast<double>(budget) * w[l] / wsum));
    }
    return target;
  };

  if (config.target_cv <= 0.0) {
    const auto target = allocate(config.total_samples);
    for (std::size_t l = 0; l < n_levels; ++l) {
      if (target[l] > stats[l].n) draw(l, target[l] - stats[l].n);
    }
    return assemble(stats, cost_per, contract, config.digital);
  }

  // Adaptive mode: grow towards the optimal allocation until the CV target
  // is met or the budget cap is exhausted.
  while (true) {
    MlmcResult current = assemble(stats, cost_per, contract, config.digital);
    if (current.cv_hat > 0.0 && current.cv_hat <= config.target_cv) return current;

    std::size_t used = 0;
    for (const auto& s : stats) used += s.n;
    if (used >= config.total_samples) {
      throw BudgetExceededError(
          "run_mlmc: target CV " + std::to_string(config.target_cv) +
          " not reached within the sample budget (cv_hat = " + std::to_string(current.cv_hat) +
          ")");
    }
    const std::size_t batch = std::min(config.total_samples - used, std::max<std::size_t>(used, 1000));
    const auto target = allocate(used + batch);
    bool grew = false;
    for (std::size_t l = 0; l < n_levels; ++l) {
      if (target[l] > stats[l].n) {
        draw(l, target[l] - stats[l].n);
        grew = true;
      }
    }
    if (!grew) {
      // allocation already saturated; push the dominant-variance level
      std::size_t worst = 0;
      double worst_term = -1.0;
      for (std::size_t l = 0; l < n_levels; ++l) {
        const double term = stats[l].variance() / static_cast<double>(stats[l].n);
        if (term > worst_term) {
          worst_term = term;
          worst = l;
        }
      }
      draw(worst, std::min<std::size_t>(batch, 1000));
    }
  }
}

}  // namespace rarebar
