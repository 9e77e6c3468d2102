#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace posenorm {

/// Deterministic random source. std::mt19937_64 output is pinned by the
/// standard and the distributions here are written out explicitly, so a seed
/// produces identical streams on every platform and compiler.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller. Draws two uniforms per call and returns
  /// one variate; no cached spare, so the stream position is predictable.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  uint64_t seed() const { return seed_; }

  /// Derive an independent child stream; used to fan one config seed out to
  /// the sampler, noise, and training components.
  Rng fork(uint64_t stream) const { return Rng(derive(seed_, stream)); }

  static uint64_t derive(uint64_t seed, uint64_t stream) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  static uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace posenorm
