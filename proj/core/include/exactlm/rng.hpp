#pragma once

// Repo-wide random number generation.
//
// One generator family is used everywhere: stream seeds are derived with
// splitmix64 over a (seed, path...) chain, and each stream is an mt19937_64.
// Uniform doubles and categorical draws are produced from raw engine words
// rather than <random> distributions, so sequences are identical across
// standard library implementations.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace exactlm {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a root seed and a path of indices
// (chain index, replicate index, ...). Deterministic and order-sensitive.
inline uint64_t derive_seed(uint64_t seed, std::initializer_list<uint64_t> path) {
  uint64_t state = seed;
  uint64_t out = splitmix64(state);
  for (uint64_t p : path) {
    state = out ^ (p + 0x9e3779b97f4a7c15ull);
    out = splitmix64(state);
  }
  return out;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n).
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller on portable uniforms.
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Inverse-CDF draw. `cdf` is a nondecreasing cumulative weight vector; the
// draw is index of the first entry exceeding u * cdf.back().
std::size_t sample_cdf(std::span<const double> cdf, double u);

std::vector<double> cdf_from_probs(std::span<const double> probs);

}  // namespace exactlm
