#pragma once

#include <cstdint>
#include <vector>

namespace rarebar {

/// Keyed, splittable random stream. Identical (master_seed, stream_id)
/// pairs reproduce the same draw sequence; distinct stream ids give
/// statistically independent sequences. Substreams are derived by hashing
/// the parent id with the supplied keys, so a fixed master seed yields the
/// same results regardless of execution order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_id = 0);

  /// Derive an independent child stream keyed by (a, b).
  RngStream substream(std::uint64_t a, std::uint64_t b = 0) const;

  std::uint64_t next_u64();

  /// Uniform on (0,1).
  double uniform();

  /// Uniform on (0,1]; safe as an argument to log().
  double uniform_pos();

  /// Standard normal via the inverse-CDF method.
  double normal();

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t stream_id() const { return id_; }

 private:
  std::uint64_t master_ = 0;
  std::uint64_t id_ = 0;
  std::uint64_t s_[4];  // xoshiro256++ state
};

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// |relative error| < 1.2e-9). Exposed for tests.
double normal_quantile(double p);

}  // namespace rarebar
