#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>

namespace relab {

namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// xoshiro256++ stream with a splitmix64-seeded state.
///
/// Streams are derived from explicit integer keys so that every episode in a
/// parallel sweep owns an independent generator, and results do not depend on
/// scheduling order. Gaussian draws use the Marsaglia polar method, so the
/// byte stream is a pure function of the key on a given platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t st = seed;
    for (auto& w : s_) w = detail::splitmix64_next(st);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  /// Derive a stream from up to four keys, e.g. (master_seed, condition
  /// index, seed index, planner id).
  static Rng keyed(std::uint64_t k0, std::uint64_t k1 = 0,
                   std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    std::uint64_t st = k0;
    std::uint64_t h = detail::splitmix64_next(st);
    st ^= k1 + 0x9e3779b97f4a7c15ULL;
    h ^= detail::splitmix64_next(st);
    st ^= k2 + 0xbf58476d1ce4e5b9ULL;
    h ^= detail::splitmix64_next(st);
    st ^= k3 + 0x94d049bb133111ebULL;
    h ^= detail::splitmix64_next(st);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl64(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n). n must be > 0.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal draw (polar method, cached spare).
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, q;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      q = u * u + v * v;
    } while (q >= 1.0 || q == 0.0);
    const double m = std::sqrt(-2.0 * std::log(q) / q);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace relab
