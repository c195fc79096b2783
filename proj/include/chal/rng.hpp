#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace chal {

// Deterministic random source. The raw stream is the mt19937_64 engine,
// whose output for a given seed is fixed by the C++ standard, so seeds
// reproduce across runs and platforms. Uniform, integer and normal draws
// are derived here rather than through <random> distributions, which are
// not portable between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection-sampled, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) {
      throw std::invalid_argument("rng: below(0)");
    }
    const std::uint64_t min = (0 - n) % n;  // 2^64 mod n
    std::uint64_t x = engine_();
    while (x < min) {
      x = engine_();
    }
    return x % n;
  }

  // Standard normal, Marsaglia polar method with one cached spare.
  double normal();

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Independent stream seed from a base seed and stream tag (splitmix64
// finalizer). Training derives one stream per purpose so that, e.g., batch
// order is identical across methods that draw different perturbation noise.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace chal
