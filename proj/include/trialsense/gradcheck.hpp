// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace trialsense {

struct GradCheckEntry {
  std::string tensor;
  std::size_t index = 0;  // column-major offset within the tensor
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  GradCheckEntry worst;
  std::size_t checked = 0;
  /// Entries whose relative error exceeds the tolerance passed in.
  std::vector<GradCheckEntry> flagged;

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

/// |a - n| / max(|a|, |n|, 1e-12).
double relative_error(double analytic, double numeric);

/// Compares a supplied gradient of the output probability against central
/// differences (f(x + eps) - f(x - eps)) / 2 eps for every parameter.
GradCheckReport compare_gradients(const ModelParams& params, const Eigen::MatrixXd& input,
                                  const ParamGrads& analytic, double eps, double flag_tolerance = 1e-4);

/// compare_gradients against backward(params, input, 1.0).
/// Throws ConfigError for eps <= 0.
GradCheckReport gradient_check(const ModelParams& params, const Eigen::MatrixXd& input, double eps,
                               double flag_tolerance = 1e-4);

/// Parameters and input for the built-in self-test of one model kind:
/// LSTM and BiLSTM with H = 4 on a 5 x 3 input, MiniConv on a 16 x 8 input.
struct GradCheckCase {
  ModelParams params;
  Eigen::MatrixXd input;
};
GradCheckCase standard_gradcheck_case(ModelKind kind, std::uint64_t seed);

}  // namespace trialsense
