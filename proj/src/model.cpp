#include "rarebar/model.hpp"

#include <cmath>
#include <stdexcept>

namespace rarebar {

void GbmParams::validate() const {
  if (!(s0 > 0.0)) throw std::invalid_argument("GbmParams: s0 must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("GbmParams: sigma must be >= 0");
  if (n_steps < 1) throw std::invalid_argument("GbmParams: n_steps must be >= 1");
  if (!(maturity > 0.0)) throw std::invalid_argument("GbmParams: maturity must be > 0");
}

PricePath evolve(const GbmParams& params, const NormalVector& z) {
  params.validate();
  if (z.size() != params.n_steps) {
    throw std::invalid_argument("evolve: normal vector length must equal n_steps");
  }
  const double dt = params.dt();
  const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * dt;
  const double vol = params.sigma * std::sqrt(dt);

  PricePath path;
  path.s0 = params.s0;
  path.s.resize(z.size());
  double s = params.s0;
  for (std::size_t n = 0; n < z.size(); ++n) {
    s *= std::exp(drift + vol * z[n]);
    path.s[n] = s;
  }
  return path;
}

NormalVector sample_normal_vector(std::size_t n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_normal_vector: n must be >= 1");
  NormalVector z(n);
  for (auto& v : z) v = rng.normal();
  return z;
}

}  // namespace rarebar
