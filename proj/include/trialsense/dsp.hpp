// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace trialsense {

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 FFT with precomputed twiddles and bit-reversal
/// table. Twiddles are evaluated directly from cos/sin rather than by
/// recurrence so per-bin error stays at rounding level.
class Fft {
 public:
  /// Throws ConfigError unless size is a power of two >= 1.
  explicit Fft(std::size_t size);

  std::size_t size() const { return size_; }
  void transform(std::span<std::complex<double>> data) const;

 private:
  std::size_t size_;
  std::vector<std::size_t> bit_reverse_;
  std::vector<std::complex<double>> twiddles_;  // e^{-2 pi i k / n}, k < n/2
};

/// |X_k|^2 for k = 0..n_fft/2 of the zero-padded frame.
/// Throws ConfigError if n_fft is not a power of two or the frame is longer than n_fft.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t n_fft);

/// Same, reusing a prepared plan and scratch buffer.
void power_spectrum(const Fft& plan, std::span<const double> frame,
                    std::vector<std::complex<double>>& scratch, std::span<double> out);

/// Orthonormal DCT-II of fixed length and its inverse (DCT-III).
class Dct2 {
 public:
  explicit Dct2(std::size_t size);

  std::size_t size() const { return static_cast<std::size_t>(basis_.rows()); }
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const { return basis_ * x; }
  Eigen::VectorXd inverse(const Eigen::VectorXd& c) const { return basis_.transpose() * c; }
  /// Row k holds s_k cos(pi k (2m + 1) / 2M).
  const Eigen::MatrixXd& basis() const { return basis_; }

 private:
  Eigen::MatrixXd basis_;
};

}  // namespace trialsense
