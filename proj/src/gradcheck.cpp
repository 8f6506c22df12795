// SPDX-License-Identifier: Apache-2.0
#include "trialsense/gradcheck.hpp"

#include "trialsense/error.hpp"
#include "trialsense/rng.hpp"

#include <algorithm>
#include <cmath>

namespace trialsense {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-12});
}

GradCheckReport compare_gradients(const ModelParams& params, const Eigen::MatrixXd& input,
                                  const ParamGrads& analytic, double eps, double flag_tolerance) {
  if (!(eps > 0.0)) throw ConfigError("finite-difference step must be positive");
  ModelParams probe = params;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.tensors();
  if (probe_tensors.size() != grad_tensors.size()) throw ShapeMismatch("gradient structure differs from params");

  GradCheckReport report;
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    auto& values = probe_tensors[t].values;
    if (values.size() != grad_tensors[t].values.size()) {
      throw ShapeMismatch("gradient tensor " + probe_tensors[t].name + " has the wrong size");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + eps;
      const double up = forward(probe, input);
      values[i] = original - eps;
      const double down = forward(probe, input);
      values[i] = original;

      GradCheckEntry entry{probe_tensors[t].name, i, grad_tensors[t].values[i], (up - down) / (2.0 * eps), 0.0};
      entry.relative_error = relative_error(entry.analytic, entry.numeric);
      ++report.checked;
      if (entry.relative_error > report.max_relative_error || report.checked == 1) {
        report.max_relative_error = entry.relative_error;
        report.worst = entry;
      }
      if (entry.relative_error > flag_tolerance) report.flagged.push_back(entry);
    }
  }
  return report;
}

GradCheckReport gradient_check(const ModelParams& params, const Eigen::MatrixXd& input, double eps,
                               double flag_tolerance) {
  if (!(eps > 0.0)) throw ConfigError("finite-difference step must be positive");
  return compare_gradients(params, input, backward(params, input, 1.0), eps, flag_tolerance);
}

GradCheckCase standard_gradcheck_case(ModelKind kind, std::uint64_t seed) {
  const bool conv = kind == ModelKind::MiniConv;
  const Eigen::Index steps = conv ? 16 : 5;
  const Eigen::Index dim = conv ? 8 : 3;
  GradCheckCase c{init_params(ModelSpec{kind, 4, seed}, dim), Eigen::MatrixXd(steps, dim)};
  Rng rng(seed ^ 0x5eedULL);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index t = 0; t < steps; ++t) c.input(t, j) = rng.normal();
  }
  return c;
}

}  // namespace trialsense
