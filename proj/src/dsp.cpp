// SPDX-License-Identifier: Apache-2.0
#include "trialsense/dsp.hpp"

#include "trialsense/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace trialsense {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

Fft::Fft(std::size_t size) : size_(size) {
  if (!is_power_of_two(size)) {
    throw ConfigError("FFT size " + std::to_string(size) + " is not a power of two");
  }
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < size) ++bits;
  bit_reverse_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bit_reverse_[i] = r;
  }
  twiddles_.resize(size / 2);
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void Fft::transform(std::span<std::complex<double>> data) const {
  if (data.size() != size_) throw ShapeMismatch("FFT buffer size differs from plan size");
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t j = bit_reverse_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= size_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = size_ / len;
    for (std::size_t start = 0; start < size_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const std::complex<double> t = twiddles_[k * stride] * data[start + k + half];
        const std::complex<double> u = data[start + k];
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }
}

void power_spectrum(const Fft& plan, std::span<const double> frame,
                    std::vector<std::complex<double>>& scratch, std::span<double> out) {
  const std::size_t n = plan.size();
  if (frame.size() > n) throw ConfigError("frame longer than n_fft");
  if (out.size() != n / 2 + 1) throw ShapeMismatch("power spectrum output must hold n_fft/2 + 1 bins");
  scratch.assign(n, {0.0, 0.0});
  for (std::size_t i = 0; i < frame.size(); ++i) scratch[i] = {frame[i], 0.0};
  plan.transform(scratch);
  for (std::size_t k = 0; k <= n / 2; ++k) out[k] = std::norm(scratch[k]);
}

std::vector<double> power_spectrum(std::span<const double> frame, std::size_t n_fft) {
  const Fft plan(n_fft);
  std::vector<std::complex<double>> scratch;
  std::vector<double> out(n_fft / 2 + 1);
  power_spectrum(plan, frame, scratch, out);
  return out;
}

Dct2::Dct2(std::size_t size) : basis_(size, size) {
  if (size == 0) throw ConfigError("DCT size must be positive");
  const double m = static_cast<double>(size);
  for (std::size_t k = 0; k < size; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (std::size_t j = 0; j < size; ++j) {
      basis_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                           (2.0 * static_cast<double>(j) + 1.0) / (2.0 * m));
    }
  }
}

}  // namespace trialsense
