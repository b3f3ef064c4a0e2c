// Copyright 2026 The greenwood Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace greenwood {

/// Philox4x32-10 block function (Salmon, Moraes, Dror, Shaw; SC'11).
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// Reproducible random stream identified by (master_seed, stream_id).
///
/// The master seed is the Philox key and the stream id occupies the upper
/// half of the counter, so every stream is an independent substream that can
/// be created directly from its id without advancing any other stream.
/// Replication i of a Monte Carlo loop uses `RngStream(seed, base + i)`,
/// which makes results independent of how replications are scheduled.
///
/// Satisfies UniformRandomBitGenerator; the distribution helpers below are
/// implemented here rather than via <random> so that the output is
/// identical across standard libraries.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Fresh stream sharing this master seed.
  RngStream substream(std::uint64_t stream_id) const noexcept {
    return RngStream(master_seed_, stream_id);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Standard normal (Box-Muller, second variate cached).
  double normal() noexcept;
  /// Unit-rate exponential.
  double exponential() noexcept;
  /// Gamma(shape, 1) via Marsaglia-Tsang; shape > 0.
  double gamma(double shape) noexcept;
  /// Chi-squared with `dof` degrees of freedom.
  double chi_squared(double dof) noexcept { return 2.0 * gamma(0.5 * dof); }

 private:
  void refill() noexcept;

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

}  // namespace greenwood
