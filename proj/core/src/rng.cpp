#include "dd/rng.hpp"

#include <cmath>

#include "dd/error.hpp"

namespace dd {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller; u1 shifted away from zero so log stays finite.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * 3.14159265358979323846 * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

int Rng::bit() { return static_cast<int>(next_u64() >> 63); }

bool Rng::bernoulli(double p) { return uniform() < p; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ConfigError("Rng::below: n must be positive");
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = ~0ULL - (~0ULL % n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

Rng Rng::split(std::uint64_t stream_id) const {
  std::uint64_t mix = s_[0] ^ rotl(s_[3], 13);
  return Rng(mix ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
}

std::vector<std::uint64_t> Rng::state() const {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(cached_normal_));
  __builtin_memcpy(&bits, &cached_normal_, sizeof(bits));
  return {s_[0], s_[1], s_[2], s_[3], bits, has_cached_normal_ ? 1ULL : 0ULL};
}

void Rng::restore(const std::vector<std::uint64_t>& state) {
  if (state.size() != 6) throw ConfigError("Rng::restore: bad state size");
  for (int i = 0; i < 4; ++i) s_[i] = state[static_cast<std::size_t>(i)];
  __builtin_memcpy(&cached_normal_, &state[4], sizeof(cached_normal_));
  has_cached_normal_ = state[5] != 0;
}

}  // namespace dd
