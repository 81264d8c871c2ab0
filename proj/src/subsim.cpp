#include "rarebar/subsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rarebar {

namespace {

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

// Seed candidate kept during a level pass. Ordering: higher g wins, ties go
// to the earlier sample index (stable-sort semantics without the sort).
struct SeedCandidate {
  double g;
  std::size_t idx;
  NormalVector z;
  double terminal;
};

struct WorseOnTop {
  bool operator()(const SeedCandidate& a, const SeedCandidate& b) const {
    if (a.g != b.g) return a.g > b.g;
    return a.idx < b.idx;
  }
};

}  // namespace

std::size_t SubSimConfig::seeds_per_level() const {
  return static_cast<std::size_t>(std::llround(beta * static_cast<double>(m)));
}

std::size_t SubSimConfig::chain_length() const {
  return static_cast<std::size_t>(std::llround(1.0 / beta));
}

void SubSimConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("SubSimConfig: beta must lie in (0,1)");
  }
  if (!near_integer(beta * static_cast<double>(m)) || seeds_per_level() < 1) {
    throw std::invalid_argument("SubSimConfig: beta*m must be an integer >= 1");
  }
  if (!near_integer(1.0 / beta)) {
    throw std::invalid_argument("SubSimConfig: 1/beta must be an integer (chain length)");
  }
  if (max_levels < 1) throw std::invalid_argument("SubSimConfig: max_levels must be >= 1");
  proposal.validate();
}

double alpha_threshold(const std::vector<double>& sorted_g, double beta, std::size_t m) {
  if (sorted_g.size() != m) {
    throw std::invalid_argument("alpha_threshold: vector length must equal m");
  }
  const auto k = static_cast<std::size_t>(std::llround(beta * static_cast<double>(m)));
  if (k + 1 > m) throw std::invalid_argument("alpha_threshold: beta*m + 1 exceeds m");
  return 0.5 * (sorted_g[k - 1] + sorted_g[k]);
}

std::size_t total_samples(std::size_t m, double beta, std::size_t L) {
  if (L < 1) throw std::invalid_argument("total_samples: L must be >= 1");
  const auto seeds = static_cast<std::size_t>(std::llround(beta * static_cast<double>(m)));
  return m + (m - seeds) * (L - 1);
}

double subsim_theoretical_cv(double p, double total_samples, double beta, double gamma,
                             double d) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("subsim_theoretical_cv: requires 0 < p < 1");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("subsim_theoretical_cv: beta must lie in (0,1)");
  }
  if (!(total_samples >= 1.0)) {
    throw std::invalid_argument("subsim_theoretical_cv: total samples must be >= 1");
  }
  if (!(gamma >= 0.0)) throw std::invalid_argument("subsim_theoretical_cv: gamma must be >= 0");
  if (!(d >= 2.0 && d <= 3.0)) {
    throw std::invalid_argument("subsim_theoretical_cv: d must lie in [2,3]");
  }
  const double lp = std::abs(std::log(p));
  const double lb = std::abs(std::log(beta));
  return std::sqrt((1.0 + gamma) * (1.0 - beta) * std::pow(lp, d) /
                   (total_samples * beta * std::pow(lb, d)));
}

SubSimResult run_subsim(const GbmParams& params, const BarrierContract& contract,
                        const SubSimConfig& config, RngStream& rng) {
  config.validate();
  const PathEvaluator eval(params, contract);
  const std::size_t n = params.n_steps;
  const std::size_t m = config.m;
  const std::size_t n_seeds = config.seeds_per_level();
  const std::size_t chain_len = config.chain_length();

  std::vector<double> g_values(m);
  std::vector<double> event_terminals;
  std::vector<SeedCandidate> seed_heap;  // worst kept candidate on top
  seed_heap.reserve(n_seeds + 1);
  const WorseOnTop worse;

  auto emit = [&](std::size_t idx, const NormalVector& z, double g, double terminal) {
    g_values[idx] = g;
    if (g == 0.0) event_terminals.push_back(terminal);
    if (seed_heap.size() < n_seeds) {
      seed_heap.push_back(SeedCandidate{g, idx, z, terminal});
      std::push_heap(seed_heap.begin(), seed_heap.end(), worse);
    } else {
      const SeedCandidate& worst = seed_heap.front();
      if (g > worst.g || (g == worst.g && idx < worst.idx)) {
        std::pop_heap(seed_heap.begin(), seed_heap.end(), worse);
        seed_heap.back() = SeedCandidate{g, idx, z, terminal};
        std::push_heap(seed_heap.begin(), seed_heap.end(), worse);
      }
    }
  };

  std::vector<LevelRecord> records;
  double prev_alpha = -std::numeric_limits<double>::infinity();
  std::vector<SeedCandidate> seeds;

  for (std::size_t level = 1; level <= config.max_levels; ++level) {
    event_terminals.clear();
    seed_heap.clear();

    if (level == 1) {
      RngStream mc = rng.substream(0, 0);
      NormalVector z(n);
      for (std::size_t i = 0; i < m; ++i) {
        for (auto& v : z) v = mc.normal();
        const PathEval e = eval(z);
        emit(i, z, e.g, e.terminal);
      }
    } else {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < n_seeds; ++j) {
        RngStream chain_rng = rng.substream(level, j + 1);
        ChainState state{seeds[j].z, seeds[j].g, seeds[j].terminal};
        emit(idx++, state.z, state.g, state.terminal);  // seed is state 1
        for (std::size_t step = 1; step < chain_len; ++step) {
          mma_step_in_place(state, prev_alpha, eval, config.proposal, chain_rng);
          emit(idx++, state.z, state.g, state.terminal);
        }
      }
    }

    const auto m_event = static_cast<std::size_t>(
        std::count(g_values.begin(), g_values.end(), 0.0));
    if (m_event >= n_seeds) {
      records.push_back(LevelRecord{level, 0.0,
                                    static_cast<double>(m_event) / static_cast<double>(m),
                                    m_event});
      SubSimResult res;
      res.levels = std::move(records);
      res.n_levels = level;
      res.m_event = m_event;
      res.m_star = m_event;
      res.p_hat = std::pow(config.beta, static_cast<double>(level - 1)) *
                  static_cast<double>(m_event) / static_cast<double>(m);
      double sum = 0.0;
      for (double t : event_terminals) sum += t;
      res.expected_terminal = sum / static_cast<double>(m_event);
      res.price_hat = discount(res.p_hat * (res.expected_terminal - contract.strike),
                               contract.rate, contract.maturity);
      res.total_samples_used = total_samples(m, config.beta, level);
      return res;
    }

    std::vector<double> sorted_g = g_values;
    std::sort(sorted_g.begin(), sorted_g.end(), std::greater<double>());
    const double alpha = alpha_threshold(sorted_g, config.beta, m);
    if (!(alpha > prev_alpha)) {
      throw StagnationError("run_subsim: threshold stagnated at level " +
                            std::to_string(level) + " (alpha = " + std::to_string(alpha) + ")");
    }
    records.push_back(LevelRecord{level, alpha, config.beta, m_event});
    prev_alpha = alpha;

    seeds.assign(seed_heap.begin(), seed_heap.end());
    std::sort(seeds.begin(), seeds.end(), [](const SeedCandidate& a, const SeedCandidate& b) {
      if (a.g != b.g) return a.g > b.g;
      return a.idx < b.idx;
    });
  }

  throw SubSimNonConvergence("run_subsim: target event not reached within " +
                                 std::to_string(config.max_levels) + " levels",
                             std::move(records));
}

}  // namespace rarebar
