#pragma once

#include <cstddef>
#include <vector>

#include "rarebar/rng.hpp"

namespace rarebar {

using NormalVector = std::vector<double>;

/// Geometric Brownian motion parameters on an equally spaced monitoring grid.
struct GbmParams {
  double s0 = 100.0;       // spot, > 0
  double mu = 0.1;         // drift per year
  double sigma = 0.2;      // volatility per sqrt-year, >= 0
  std::size_t n_steps = 250;
  double maturity = 1.0;   // years, > 0

  double dt() const { return maturity / static_cast<double>(n_steps); }

  /// Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

/// Discrete asset trajectory S_1..S_N together with its spot.
struct PricePath {
  double s0 = 0.0;
  std::vector<double> s;

  std::size_t size() const { return s.size(); }
  double terminal() const { return s.back(); }
};

/// Exact lognormal step: S_n = S_{n-1} * exp((mu - sigma^2/2) dt + sigma sqrt(dt) z_n).
/// Deterministic in (params, z); throws on a length mismatch.
PricePath evolve(const GbmParams& params, const NormalVector& z);

/// n i.i.d. standard normal draws from the given stream.
NormalVector sample_normal_vector(std::size_t n, RngStream& rng);

}  // namespace rarebar
