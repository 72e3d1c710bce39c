#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace picard::fo {

// Feed-forward scorer with two hidden layers of width 64 and tanh
// nonlinearities. Weights are row-major; layer i maps widths[i] inputs to
// widths[i+1] outputs.
struct MlpParams {
  std::vector<std::int32_t> widths;  // {input, hidden, hidden, output}
  std::vector<double> w1, b1, w2, b2, w3, b3;

  static MlpParams zeros(std::int32_t input, std::int32_t output,
                         std::int32_t hidden = 64);
  // Entries drawn uniformly from (-0.1, 0.1) with the given seed.
  static MlpParams seeded_uniform(std::int32_t input, std::int32_t output,
                                  std::uint64_t seed, std::int32_t hidden = 64);

  [[nodiscard]] bool all_zero() const;

  // Forward pass: hidden layers tanh, output linear. `out` must have
  // widths.back() entries.
  void forward(std::span<const double> input, std::span<double> out) const;

  // Flat binary record: the four layer sizes as little-endian 32-bit
  // integers, then each layer's weights and biases as row-major
  // little-endian 64-bit floats (w1, b1, w2, b2, w3, b3).
  void save(const std::filesystem::path& path) const;
  static MlpParams load(const std::filesystem::path& path);

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

}  // namespace picard::fo
