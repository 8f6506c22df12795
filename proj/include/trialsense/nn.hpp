// SPDX-License-Identifier: Apache-2.0
//
// Differentiable building blocks: activations, the LSTM cell and its
// unrolled forward/backward passes, and valid 2-D cross-correlation.
#pragma once

#include <Eigen/Dense>

#include <vector>

namespace trialsense {

/// Logistic function, evaluated on the branch that never exponentiates a
/// positive argument.
double sigmoid(double x);
Eigen::VectorXd sigmoid(const Eigen::VectorXd& x);
Eigen::VectorXd tanh(const Eigen::VectorXd& x);

enum class Gate { Input = 0, Forget = 1, Output = 2, Candidate = 3 };

/// Gate weights stacked row-wise in the order input, forget, output,
/// candidate. Each H-row block multiplies the concatenation [h_{t-1}; x_t],
/// so the first H columns are recurrent and the remaining D are input weights.
struct LstmParams {
  Eigen::MatrixXd weights;  // 4H x (H + D)
  Eigen::VectorXd bias;     // 4H

  static LstmParams zeros(Eigen::Index hidden, Eigen::Index input_dim);

  Eigen::Index hidden() const { return weights.rows() / 4; }
  Eigen::Index input_dim() const { return weights.cols() - hidden(); }

  auto gate_weights(Gate g) { return weights.middleRows(static_cast<Eigen::Index>(g) * hidden(), hidden()); }
  auto gate_weights(Gate g) const {
    return weights.middleRows(static_cast<Eigen::Index>(g) * hidden(), hidden());
  }
  auto gate_bias(Gate g) { return bias.segment(static_cast<Eigen::Index>(g) * hidden(), hidden()); }
  auto gate_bias(Gate g) const { return bias.segment(static_cast<Eigen::Index>(g) * hidden(), hidden()); }

  /// Throws ShapeMismatch on inconsistent or non-finite tensors.
  void validate() const;
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;

  static LstmState zeros(Eigen::Index hidden) {
    return {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)};
  }
};

/// One step:
///   i = s(W_i [h; x] + b_i), f = s(...), o = s(...), g = tanh(W_C [h; x] + b_C)
///   c' = f * c + i * g,  h' = o * tanh(c')
/// Throws ShapeMismatch.
LstmState lstm_cell(const Eigen::VectorXd& x, const LstmState& prev, const LstmParams& p);

/// Per-step activations kept for the backward pass. Column t of each matrix
/// belongs to step t; hidden/cell carry an extra leading column for the
/// initial state.
struct LstmCache {
  Eigen::MatrixXd input;   // T x D
  Eigen::MatrixXd gates;   // 4H x T, post-activation (i, f, o, g)
  Eigen::MatrixXd hidden;  // H x (T + 1)
  Eigen::MatrixXd cell;    // H x (T + 1)
  Eigen::MatrixXd cell_tanh;  // H x T

  Eigen::Index steps() const { return gates.cols(); }
  LstmState state(Eigen::Index t) const { return {hidden.col(t + 1), cell.col(t + 1)}; }
  LstmState final_state() const { return state(steps() - 1); }
};

/// Runs the cell left to right over the rows of seq (T x D).
/// Throws ShapeMismatch for T == 0 or a width mismatch.
LstmCache lstm_forward(const Eigen::MatrixXd& seq, const LstmParams& p, const LstmState& initial);
LstmCache lstm_forward(const Eigen::MatrixXd& seq, const LstmParams& p);

/// Backpropagation through time. upstream_hidden is H x T, the loss gradient
/// with respect to each step's hidden output. Parameter gradients are added to
/// grads (which must already have p's shapes); the input gradient is returned.
Eigen::MatrixXd lstm_backward(const LstmParams& p, const LstmCache& cache,
                              const Eigen::MatrixXd& upstream_hidden, LstmParams& grads);

/// Forward LSTM plus an independent LSTM over the reversed sequence. The
/// backward run is stored in its own (reversed) time order.
struct BiLstmCache {
  LstmCache forward;
  LstmCache backward;
};

BiLstmCache bilstm_run(const Eigen::MatrixXd& seq, const LstmParams& forward_params,
                       const LstmParams& backward_params);

/// Row t is [fwd h_t ; bwd h_t] (T x 2H), with the backward half re-reversed
/// so that bwd h_t has consumed x_t .. x_{T-1}.
Eigen::MatrixXd bilstm_forward(const Eigen::MatrixXd& seq, const LstmParams& forward_params,
                               const LstmParams& backward_params);

Eigen::MatrixXd reverse_rows(const Eigen::MatrixXd& m);

/// Valid cross-correlation, stride 1: out(i, j) = sum_{m,n} x(i+m, j+n) w(m, n) + b.
/// Throws KernelTooLarge when the kernel does not fit.
Eigen::MatrixXd conv2d(const Eigen::MatrixXd& x, const Eigen::MatrixXd& kernel, double bias);

/// Kernel gradient of conv2d for output gradient dout: dw(m, n) = sum_{i,j} dout(i, j) x(i+m, j+n).
Eigen::MatrixXd conv2d_kernel_grad(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dout,
                                   Eigen::Index kernel_rows, Eigen::Index kernel_cols);

}  // namespace trialsense
