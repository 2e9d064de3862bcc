#pragma once

// Counter-based random streams for reproducible parallel simulation.
//
// Every consumer draws from a private stream keyed by (master seed,
// pulse index, stream tag). The n-th output of a stream is
//
//     mix64(derive(seed, pulse, tag) + n * kGoldenGamma)
//
// i.e. SplitMix64 running from a hashed starting point. Results are a pure
// function of the key, so trials can execute in any order, on any number of
// threads, and still reproduce bit for bit.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace heraldmc::rng {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Stafford mix 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Substream labels. The numeric values are part of the reproducibility
// contract: changing them changes every simulated data set.
enum class StreamTag : std::uint64_t {
  PairCount = 1,     // number of pairs emitted in a pulse
  HeraldDetect = 2,  // detector H response
  Routing = 3,       // model outcome decisions / hidden variables
  DetectA = 4,       // detector A response
  DetectB = 5,       // detector B response
};

class Stream {
 public:
  Stream(std::uint64_t master_seed, std::uint64_t pulse_index, StreamTag tag) noexcept {
    std::uint64_t h = mix64(master_seed + kGoldenGamma);
    h = mix64(h ^ mix64(pulse_index + 2 * kGoldenGamma));
    state_ = mix64(h ^ mix64(static_cast<std::uint64_t>(tag) + 3 * kGoldenGamma));
  }

  std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Threshold sampling: for a fixed draw the result is monotone in p,
  // so raising an efficiency can never turn a hit into a miss.
  bool bernoulli(double p) noexcept { return next_unit() < p; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_unit(); }

  // Centered uniform of total width `width` (timing jitter).
  double jitter(double width) noexcept { return (next_unit() - 0.5) * width; }

  // Knuth product-of-uniforms sampler. Large means are split into chunks of
  // 32 so exp(-mean) never underflows; the sum of independent Poisson draws
  // is Poisson with the summed mean.
  std::uint64_t poisson(double mean) {
    if (!std::isfinite(mean) || mean < 0.0)
      throw std::invalid_argument("poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    std::uint64_t total = 0;
    while (mean > 32.0) {
      total += poisson_knuth(std::exp(-32.0));
      mean -= 32.0;
    }
    return total + poisson_knuth(std::exp(-mean));
  }

  // Same sampler with exp(-mean) precomputed; used in hot loops.
  std::uint64_t poisson_knuth(double exp_neg_mean) noexcept {
    std::uint64_t k = 0;
    double prod = 1.0;
    do {
      prod *= next_unit();
      ++k;
    } while (prod > exp_neg_mean);
    return k - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace heraldmc::rng
