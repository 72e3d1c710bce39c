#include "picard/fo/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "picard/rng.hpp"

namespace picard::fo {

namespace {

void fill_uniform(std::vector<double>& values, std::size_t count,
                  rng::Engine& gen) {
  values.resize(count);
  for (auto& v : values) v = rng::range(gen, -0.1, 0.1);
}

void write_u32_le(std::ofstream& out, std::uint32_t value) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) {
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32_le(std::ifstream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) {
    value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  }
  return value;
}

void write_f64_le(std::ofstream& out, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
      bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

void read_f64_le(std::ifstream& in, std::vector<double>& values,
                 std::size_t count) {
  values.resize(count);
  for (auto& v : values) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    std::memcpy(&v, &bits, sizeof(v));
  }
}

}  // namespace

MlpParams MlpParams::zeros(std::int32_t input, std::int32_t output,
                           std::int32_t hidden) {
  MlpParams p;
  p.widths = {input, hidden, hidden, output};
  p.w1.assign(static_cast<std::size_t>(hidden) * input, 0.0);
  p.b1.assign(static_cast<std::size_t>(hidden), 0.0);
  p.w2.assign(static_cast<std::size_t>(hidden) * hidden, 0.0);
  p.b2.assign(static_cast<std::size_t>(hidden), 0.0);
  p.w3.assign(static_cast<std::size_t>(output) * hidden, 0.0);
  p.b3.assign(static_cast<std::size_t>(output), 0.0);
  return p;
}

MlpParams MlpParams::seeded_uniform(std::int32_t input, std::int32_t output,
                                    std::uint64_t seed, std::int32_t hidden) {
  MlpParams p;
  p.widths = {input, hidden, hidden, output};
  auto gen = rng::make(seed);
  fill_uniform(p.w1, static_cast<std::size_t>(hidden) * input, gen);
  fill_uniform(p.b1, static_cast<std::size_t>(hidden), gen);
  fill_uniform(p.w2, static_cast<std::size_t>(hidden) * hidden, gen);
  fill_uniform(p.b2, static_cast<std::size_t>(hidden), gen);
  fill_uniform(p.w3, static_cast<std::size_t>(output) * hidden, gen);
  fill_uniform(p.b3, static_cast<std::size_t>(output), gen);
  return p;
}

bool MlpParams::all_zero() const {
  auto zero = [](const std::vector<double>& v) {
    for (double x : v) {
      if (x != 0.0) return false;
    }
    return true;
  };
  return zero(w1) && zero(b1) && zero(w2) && zero(b2) && zero(w3) && zero(b3);
}

void MlpParams::forward(std::span<const double> input,
                        std::span<double> out) const {
  const auto in_w = static_cast<std::size_t>(widths[0]);
  const auto h = static_cast<std::size_t>(widths[1]);
  const auto out_w = static_cast<std::size_t>(widths[3]);
  if (input.size() != in_w || out.size() != out_w) {
    throw std::invalid_argument("mlp forward: dimension mismatch");
  }

  std::vector<double> h1(h), h2(h);
  for (std::size_t r = 0; r < h; ++r) {
    double acc = b1[r];
    const double* row = w1.data() + r * in_w;
    for (std::size_t c = 0; c < in_w; ++c) acc += row[c] * input[c];
    h1[r] = std::tanh(acc);
  }
  for (std::size_t r = 0; r < h; ++r) {
    double acc = b2[r];
    const double* row = w2.data() + r * h;
    for (std::size_t c = 0; c < h; ++c) acc += row[c] * h1[c];
    h2[r] = std::tanh(acc);
  }
  for (std::size_t r = 0; r < out_w; ++r) {
    double acc = b3[r];
    const double* row = w3.data() + r * h;
    for (std::size_t c = 0; c < h; ++c) acc += row[c] * h2[c];
    out[r] = acc;
  }
}

void MlpParams::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  for (auto w : widths) write_u32_le(out, static_cast<std::uint32_t>(w));
  write_f64_le(out, w1);
  write_f64_le(out, b1);
  write_f64_le(out, w2);
  write_f64_le(out, b2);
  write_f64_le(out, w3);
  write_f64_le(out, b3);
}

MlpParams MlpParams::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  MlpParams p;
  p.widths.resize(4);
  for (auto& w : p.widths) w = static_cast<std::int32_t>(read_u32_le(in));
  const auto in_w = static_cast<std::size_t>(p.widths[0]);
  const auto h = static_cast<std::size_t>(p.widths[1]);
  const auto out_w = static_cast<std::size_t>(p.widths[3]);
  read_f64_le(in, p.w1, h * in_w);
  read_f64_le(in, p.b1, h);
  read_f64_le(in, p.w2, h * h);
  read_f64_le(in, p.b2, h);
  read_f64_le(in, p.w3, out_w * h);
  read_f64_le(in, p.b3, out_w);
  if (!in) {
    throw std::runtime_error("truncated parameter file " + path.string());
  }
  return p;
}

}  // namespace picard::fo
