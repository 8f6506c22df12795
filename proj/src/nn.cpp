// SPDX-License-Identifier: Apache-2.0
#include "trialsense/nn.hpp"

#include "trialsense/error.hpp"

#include <cmath>
#include <string>

namespace trialsense {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::VectorXd tanh(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return std::tanh(v); });
}

LstmParams LstmParams::zeros(Eigen::Index hidden, Eigen::Index input_dim) {
  return {Eigen::MatrixXd::Zero(4 * hidden, hidden + input_dim), Eigen::VectorXd::Zero(4 * hidden)};
}

void LstmParams::validate() const {
  if (weights.rows() == 0 || weights.rows() % 4 != 0) throw ShapeMismatch("LSTM weights need 4H rows");
  if (weights.cols() <= hidden()) throw ShapeMismatch("LSTM weights need H + D columns with D >= 1");
  if (bias.size() != weights.rows()) throw ShapeMismatch("LSTM bias length differs from 4H");
  if (!weights.allFinite() || !bias.allFinite()) throw ShapeMismatch("LSTM parameters not finite");
}

namespace {

void check_step_shapes(const Eigen::VectorXd& x, const LstmState& prev, const LstmParams& p) {
  const Eigen::Index h = p.hidden();
  if (x.size() != p.input_dim()) {
    throw ShapeMismatch("LSTM input has width " + std::to_string(x.size()) + ", parameters expect " +
                        std::to_string(p.input_dim()));
  }
  if (prev.h.size() != h || prev.c.size() != h) throw ShapeMismatch("LSTM state size differs from H");
}

// Applies the gate nonlinearities in place to a stacked pre-activation column.
template <class Column>
void activate_gates(Column&& z, Eigen::Index h) {
  for (Eigen::Index r = 0; r < 3 * h; ++r) z(r) = sigmoid(z(r));
  for (Eigen::Index r = 3 * h; r < 4 * h; ++r) z(r) = std::tanh(z(r));
}

}  // namespace

LstmState lstm_cell(const Eigen::VectorXd& x, const LstmState& prev, const LstmParams& p) {
  check_step_shapes(x, prev, p);
  const Eigen::Index h = p.hidden();
  Eigen::VectorXd concat(h + x.size());
  concat << prev.h, x;
  Eigen::VectorXd z = p.weights * concat + p.bias;
  activate_gates(z, h);

  const auto i = z.segment(0, h).array();
  const auto f = z.segment(h, h).array();
  const auto o = z.segment(2 * h, h).array();
  const auto g = z.segment(3 * h, h).array();
  LstmState next;
  next.c = (f * prev.c.array() + i * g).matrix();
  next.h = (o * next.c.array().tanh()).matrix();
  return next;
}

LstmCache lstm_forward(const Eigen::MatrixXd& seq, const LstmParams& p, const LstmState& initial) {
  const Eigen::Index steps = seq.rows();
  const Eigen::Index h = p.hidden();
  if (steps == 0) throw ShapeMismatch("LSTM needs at least one time step");
  if (seq.cols() != p.input_dim()) {
    throw ShapeMismatch("sequence width " + std::to_string(seq.cols()) + " differs from LSTM input " +
                        std::to_string(p.input_dim()));
  }
  if (initial.h.size() != h || initial.c.size() != h) throw ShapeMismatch("initial state size differs from H");

  LstmCache cache;
  cache.input = seq;
  cache.hidden.resize(h, steps + 1);
  cache.cell.resize(h, steps + 1);
  cache.cell_tanh.resize(h, steps);
  cache.hidden.col(0) = initial.h;
  cache.cell.col(0) = initial.c;

  // Input contributions for all steps in one product; the recurrent part is added per step.
  cache.gates = p.weights.rightCols(p.input_dim()) * seq.transpose();
  cache.gates.colwise() += p.bias;
  const auto recurrent = p.weights.leftCols(h);

  for (Eigen::Index t = 0; t < steps; ++t) {
    auto z = cache.gates.col(t);
    z.noalias() += recurrent * cache.hidden.col(t);
    activate_gates(z, h);
    const auto i = z.segment(0, h).array();
    const auto f = z.segment(h, h).array();
    const auto o = z.segment(2 * h, h).array();
    const auto g = z.segment(3 * h, h).array();
    cache.cell.col(t + 1) = (f * cache.cell.col(t).array() + i * g).matrix();
    cache.cell_tanh.col(t) = cache.cell.col(t + 1).array().tanh().matrix();
    cache.hidden.col(t + 1) = (o * cache.cell_tanh.col(t).array()).matrix();
  }
  return cache;
}

LstmCache lstm_forward(const Eigen::MatrixXd& seq, const LstmParams& p) {
  return lstm_forward(seq, p, LstmState::zeros(p.hidden()));
}

Eigen::MatrixXd lstm_backward(const LstmParams& p, const LstmCache& cache,
                              const Eigen::MatrixXd& upstream_hidden, LstmParams& grads) {
  const Eigen::Index h = p.hidden();
  const Eigen::Index steps = cache.steps();
  if (upstream_hidden.rows() != h || upstream_hidden.cols() != steps) {
    throw ShapeMismatch("upstream hidden gradient must be H x T");
  }
  if (grads.weights.rows() != p.weights.rows() || grads.weights.cols() != p.weights.cols() ||
      grads.bias.size() != p.bias.size()) {
    throw ShapeMismatch("gradient buffers differ from parameter shapes");
  }

  Eigen::MatrixXd dz(4 * h, steps);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
  const auto recurrent = p.weights.leftCols(h);

  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto gates = cache.gates.col(t);
    const Eigen::ArrayXd i = gates.segment(0, h).array();
    const Eigen::ArrayXd f = gates.segment(h, h).array();
    const Eigen::ArrayXd o = gates.segment(2 * h, h).array();
    const Eigen::ArrayXd g = gates.segment(3 * h, h).array();
    const Eigen::ArrayXd tc = cache.cell_tanh.col(t).array();
    const Eigen::ArrayXd c_prev = cache.cell.col(t).array();

    const Eigen::ArrayXd dh = upstream_hidden.col(t).array() + dh_next.array();
    const Eigen::ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc * tc);

    dz.col(t).segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
    dz.col(t).segment(h, h) = (dc * c_prev * f * (1.0 - f)).matrix();
    dz.col(t).segment(2 * h, h) = (dh * tc * o * (1.0 - o)).matrix();
    dz.col(t).segment(3 * h, h) = (dc * i * (1.0 - g * g)).matrix();

    dc_next = (dc * f).matrix();
    dh_next.noalias() = recurrent.transpose() * dz.col(t);
  }

  grads.weights.leftCols(h).noalias() += dz * cache.hidden.leftCols(steps).transpose();
  grads.weights.rightCols(p.input_dim()).noalias() += dz * cache.input;
  grads.bias += dz.rowwise().sum();
  return (p.weights.rightCols(p.input_dim()).transpose() * dz).transpose();
}

Eigen::MatrixXd reverse_rows(const Eigen::MatrixXd& m) { return m.colwise().reverse(); }

BiLstmCache bilstm_run(const Eigen::MatrixXd& seq, const LstmParams& forward_params,
                       const LstmParams& backward_params) {
  return {lstm_forward(seq, forward_params), lstm_forward(reverse_rows(seq), backward_params)};
}

Eigen::MatrixXd bilstm_forward(const Eigen::MatrixXd& seq, const LstmParams& forward_params,
                               const LstmParams& backward_params) {
  const BiLstmCache run = bilstm_run(seq, forward_params, backward_params);
  const Eigen::Index steps = seq.rows();
  const Eigen::Index hf = forward_params.hidden();
  const Eigen::Index hb = backward_params.hidden();
  Eigen::MatrixXd out(steps, hf + hb);
  for (Eigen::Index t = 0; t < steps; ++t) {
    out.row(t).head(hf) = run.forward.hidden.col(t + 1).transpose();
    out.row(t).tail(hb) = run.backward.hidden.col(steps - t).transpose();
  }
  return out;
}

Eigen::MatrixXd conv2d(const Eigen::MatrixXd& x, const Eigen::MatrixXd& kernel, double bias) {
  const Eigen::Index kr = kernel.rows();
  const Eigen::Index kc = kernel.cols();
  if (kr < 1 || kc < 1 || kr > x.rows() || kc > x.cols()) {
    throw KernelTooLarge(std::to_string(kr) + "x" + std::to_string(kc) + " kernel on " +
                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + " input");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(x.rows() - kr + 1, x.cols() - kc + 1, bias);
  // Accumulate one kernel tap at a time as a shifted block; same sum as the
  // per-output double loop, vectorized over the output map.
  for (Eigen::Index n = 0; n < kc; ++n) {
    for (Eigen::Index m = 0; m < kr; ++m) {
      out += kernel(m, n) * x.block(m, n, out.rows(), out.cols());
    }
  }
  return out;
}

Eigen::MatrixXd conv2d_kernel_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dout,
                                   Eigen::Index kernel_rows, Eigen::Index kernel_cols) {
  if (dout.rows() != x.rows() - kernel_rows + 1 || dout.cols() != x.cols() - kernel_cols + 1) {
    throw ShapeMismatch("conv output gradient has the wrong shape");
  }
  Eigen::MatrixXd dw(kernel_rows, kernel_cols);
  for (Eigen::Index n = 0; n < kernel_cols; ++n) {
    for (Eigen::Index m = 0; m < kernel_rows; ++m) {
      dw(m, n) = (x.block(m, n, dout.rows(), dout.cols()).array() * dout.array()).sum();
    }
  }
  return dw;
}

}  // namespace trialsense
