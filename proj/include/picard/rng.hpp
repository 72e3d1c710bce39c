#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace picard::rng {

// All randomness in the project flows through these helpers. std::mt19937_64
// is bit-specified by the standard, and the mappings below avoid the
// implementation-defined std::*_distribution classes, so a fixed seed yields
// identical streams on every platform.
using Engine = std::mt19937_64;

inline Engine make(std::uint64_t seed) { return Engine{seed}; }

// Uniform integer in [0, n). Rejection sampling to avoid modulo bias.
inline std::uint64_t below(Engine& gen, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  std::uint64_t value;
  do {
    value = gen();
  } while (value >= limit);
  return value % n;
}

// Uniform double in [0, 1) with 53 random mantissa bits.
inline double unit(Engine& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double range(Engine& gen, double lo, double hi) {
  return lo + (hi - lo) * unit(gen);
}

template <typename T>
void shuffle(std::span<T> values, Engine& gen) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(below(gen, i));
    std::swap(values[i - 1], values[j]);
  }
}

// Samples an index proportionally to `weights` (all non-negative, sum > 0).
class WeightedSampler {
 public:
  explicit WeightedSampler(std::span<const double> weights) {
    cumulative_.reserve(weights.size());
    double total = 0.0;
    for (double w : weights) {
      total += w;
      cumulative_.push_back(total);
    }
  }

  [[nodiscard]] std::size_t sample(Engine& gen) const {
    const double u = unit(gen) * cumulative_.back();
    std::size_t lo = 0, hi = cumulative_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cumulative_[mid] <= u) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

 private:
  std::vector<double> cumulative_;
};

}  // namespace picard::rng
