#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace mousedyn {

// splitmix64 step (Vigna). Advances the state and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and a path of indices,
// e.g. derive_seed(master, {kStreamForest, user_id, fold}). Streams derived from
// distinct paths are independent, so parallel work cannot affect results.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(master + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t p : path) {
    s = mix64(s ^ mix64(p + 0x9e3779b97f4a7c15ULL));
  }
  return s;
}

// Stream identifiers used as the first path element of derive_seed.
enum SeedStream : std::uint64_t {
  kStreamDataset = 1,
  kStreamFolds = 2,
  kStreamForest = 3,
  kStreamTree = 4,
  kStreamSynthetic = 5,
};

// Small deterministic PRNG. Not std::uniform_int_distribution because its
// output is implementation-defined; results here must be stable across
// toolchains for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller (no spare caching).
  double next_gaussian() {
    double u;
    do {
      u = next_double();
    } while (u <= 0.0);
    const double v = next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t k = static_cast<std::size_t>(next_below(i));
      using std::swap;
      swap(v[i - 1], v[k]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace mousedyn
