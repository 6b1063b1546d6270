#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace mcpc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::uint64_t h, const void* bytes, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives the seed of a named child stream from a master seed. Every source
/// of randomness in the project is a (master, stream-name, index) triple, so
/// independent work units can run in any order and still reproduce bit-exact.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = detail::fnv1a64(h, &master, sizeof(master));
  h = detail::fnv1a64(h, stream.data(), stream.size());
  h = detail::fnv1a64(h, &index, sizeof(index));
  return detail::splitmix64(h);
}

/// mt19937_64 with rejection-sampled integer draws so results do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::size_t>(x % span);
  }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_index(static_cast<std::size_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::span<T> xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::swap(xs[i - 1], xs[uniform_index(i)]);
    }
  }

  template <class T>
  const T& pick(std::span<const T> xs) {
    return xs[uniform_index(xs.size())];
  }

 private:
  std::mt19937_64 engine_;
};

inline Rng derive_rng(std::uint64_t master, std::string_view stream,
                      std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

}  // namespace mcpc
