#pragma once

#include <complex>
#include <cstdint>

namespace smlab::numkit {

/// Reproducible random stream identified by (master_seed, stream_id).
///
/// The generator is xoshiro256** seeded through splitmix64, so a stream's
/// sequence depends only on its two identifiers. Sub-streams obtained with
/// derive() are what make per-path and per-sample draws independent of the
/// order in which paths or samples are processed.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Fresh stream with the same master seed and an id mixed from `sub`.
  RngStream derive(std::uint64_t sub) const;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal (Marsaglia polar method).
  double normal() noexcept;
  /// (N(0,1) + i N(0,1)) / sqrt(2), unit second absolute moment.
  std::complex<double> complex_normal() noexcept;
  /// Exponential with unit rate.
  double exponential() noexcept;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace smlab::numkit
