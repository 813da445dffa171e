#pragma once

#include <cstdint>
#include <vector>

namespace dd {

/// Deterministic pseudo-random generator (xoshiro256** seeded via splitmix64).
///
/// The standard library distributions are implementation defined, so every
/// draw used by the pipeline (weight init, splits, watermarks, noise) goes
/// through this class to keep runs bit-reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (pairs cached).
  double normal();
  double normal(double mean, double stddev);
  /// Single fair bit.
  int bit();
  bool bernoulli(double p);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle, order fixed by this generator's stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Independent child stream; distinct ids give decorrelated streams.
  Rng split(std::uint64_t stream_id) const;

  /// Full generator state for bitwise-reproducible checkpoint/resume.
  std::vector<std::uint64_t> state() const;
  void restore(const std::vector<std::uint64_t>& state);

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace dd
