// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/fusion.hpp"
#include "trialsense/nn.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trialsense {

enum class ModelKind { Lstm, BiLstm, MiniConv };

std::string_view model_kind_name(ModelKind kind);  // "lstm", "bilstm", "miniconv"
std::string_view model_kind_label(ModelKind kind);  // "LSTM", "BILSTM", "MINICONV"
std::optional<ModelKind> parse_model_kind(std::string_view text);

inline constexpr Eigen::Index kConvFilters = 8;
inline constexpr Eigen::Index kConvKernel = 3;

struct ModelSpec {
  ModelKind kind = ModelKind::Lstm;
  Eigen::Index hidden = 128;
  std::uint64_t init_seed = 0;

  /// Width of the dense head input: H, 2H, or the number of conv filters.
  Eigen::Index head_width() const;
};

struct ConvParams {
  std::vector<Eigen::MatrixXd> kernels;  // one kConvKernel x kConvKernel map per filter
  Eigen::VectorXd bias;                  // one per filter
};

struct DenseParams {
  Eigen::RowVectorXd weights;
  double bias = 0.0;
};

/// Named view of one parameter tensor (column-major storage).
template <class Scalar>
struct BasicTensorView {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::span<Scalar> values;
};

using TensorView = BasicTensorView<double>;
using ConstTensorView = BasicTensorView<const double>;

/// All trainable tensors of one classifier. Which members are live depends
/// on spec.kind; the others stay empty.
struct ModelParams {
  ModelSpec spec;
  Eigen::Index input_dim = 0;
  LstmParams lstm;           // LSTM, and the forward direction of BiLSTM
  LstmParams lstm_backward;  // BiLSTM only
  ConvParams conv;           // MiniConv only
  DenseParams head;

  /// Live tensors in a fixed order: recurrent/conv tensors first, head last.
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
  std::size_t parameter_count() const;
  /// Same shapes, all zeros.
  ModelParams zeros_like() const;

  /// Throws ShapeMismatch.
  void validate() const;
};

using ParamGrads = ModelParams;

/// Uniform(-s, s) with s = 1 / sqrt(fan_in) for every tensor, drawn from
/// spec.init_seed; LSTM forget-gate biases start at 1.0. fan_in is H + D for
/// gate weights, k_h k_w for conv kernels, and the head width for the head.
ModelParams init_params(const ModelSpec& spec, Eigen::Index input_dim);

/// Everything the backward pass needs from one forward evaluation.
struct ForwardPass {
  double probability = 0.0;
  double logit = 0.0;
  Eigen::VectorXd head_input;
  LstmCache forward_lstm;
  LstmCache backward_lstm;
  Eigen::MatrixXd input;                   // MiniConv keeps its input for kernel gradients
  std::vector<Eigen::MatrixXd> activations;  // MiniConv tanh maps
};

/// LSTM: final hidden state -> dense -> sigmoid.
/// BiLSTM: [final forward state; final backward state] -> dense -> sigmoid;
///   the backward direction's final state is the one that has read the whole
///   sequence (i.e. its hidden at original index 0).
/// MiniConv: 8 filters 3x3 on the T x D input -> tanh -> global average
///   pool -> dense(8 -> 1) -> sigmoid.
/// Throws ShapeMismatch when the input width differs from params.input_dim.
ForwardPass forward_pass(const ModelParams& params, const Eigen::MatrixXd& input);
double forward(const ModelParams& params, const Eigen::MatrixXd& input);
double forward(const ModelParams& params, const FusedInput& input);

/// Gradients of upstream * probability with respect to every live tensor.
ParamGrads backward(const ModelParams& params, const ForwardPass& pass, double upstream);
ParamGrads backward(const ModelParams& params, const Eigen::MatrixXd& input, double upstream);
/// Adds the gradients into grads instead of allocating (batch accumulation).
void backward_accumulate(const ModelParams& params, const ForwardPass& pass, double upstream,
                         ParamGrads& grads);

/// Adds scale * src into dst tensor by tensor. Shapes must agree.
void accumulate(ParamGrads& dst, const ParamGrads& src, double scale = 1.0);

}  // namespace trialsense
