// SPDX-License-Identifier: Apache-2.0
#include "trialsense/model.hpp"

#include "trialsense/error.hpp"
#include "trialsense/rng.hpp"

#include <cmath>

namespace trialsense {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lstm: return "lstm";
    case ModelKind::BiLstm: return "bilstm";
    case ModelKind::MiniConv: return "miniconv";
  }
  return "unknown";
}

std::string_view model_kind_label(ModelKind kind) {
  switch (kind) {
    case ModelKind::Lstm: return "LSTM";
    case ModelKind::BiLstm: return "BILSTM";
    case ModelKind::MiniConv: return "MINICONV";
  }
  return "UNKNOWN";
}

std::optional<ModelKind> parse_model_kind(std::string_view text) {
  if (text == "lstm" || text == "LSTM") return ModelKind::Lstm;
  if (text == "bilstm" || text == "BILSTM" || text == "BiLSTM") return ModelKind::BiLstm;
  if (text == "miniconv" || text == "MINICONV" || text == "MiniConv") return ModelKind::MiniConv;
  return std::nullopt;
}

Eigen::Index ModelSpec::head_width() const {
  switch (kind) {
    case ModelKind::Lstm: return hidden;
    case ModelKind::BiLstm: return 2 * hidden;
    case ModelKind::MiniConv: return kConvFilters;
  }
  return 0;
}

namespace {

template <class View, class Params>
std::vector<View> collect_tensors(Params& p) {
  using Scalar = std::remove_reference_t<decltype(*p.head.weights.data())>;
  std::vector<View> out;
  auto add_matrix = [&out](std::string name, auto& m) {
    out.push_back(View{std::move(name), m.rows(), m.cols(),
                       std::span<Scalar>(m.data(), static_cast<std::size_t>(m.size()))});
  };
  auto add_lstm = [&](const std::string& prefix, auto& lstm) {
    add_matrix(prefix + ".weights", lstm.weights);
    add_matrix(prefix + ".bias", lstm.bias);
  };
  switch (p.spec.kind) {
    case ModelKind::Lstm: add_lstm("lstm", p.lstm); break;
    case ModelKind::BiLstm:
      add_lstm("lstm_fwd", p.lstm);
      add_lstm("lstm_bwd", p.lstm_backward);
      break;
    case ModelKind::MiniConv:
      for (std::size_t k = 0; k < p.conv.kernels.size(); ++k) {
        add_matrix("conv.kernel" + std::to_string(k), p.conv.kernels[k]);
      }
      add_matrix("conv.bias", p.conv.bias);
      break;
  }
  add_matrix("head.weights", p.head.weights);
  out.push_back(View{"head.bias", 1, 1, std::span<Scalar>(&p.head.bias, 1)});
  return out;
}

}  // namespace

std::vector<TensorView> ModelParams::tensors() { return collect_tensors<TensorView>(*this); }

std::vector<ConstTensorView> ModelParams::tensors() const {
  return collect_tensors<ConstTensorView>(*this);
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.values.size();
  return n;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto& t : z.tensors()) std::fill(t.values.begin(), t.values.end(), 0.0);
  return z;
}

void ModelParams::validate() const {
  if (input_dim < 1) throw ShapeMismatch("input_dim must be positive");
  if (head.weights.size() != spec.head_width()) throw ShapeMismatch("head width differs from the model spec");
  switch (spec.kind) {
    case ModelKind::BiLstm:
      lstm_backward.validate();
      if (lstm_backward.hidden() != spec.hidden || lstm_backward.input_dim() != input_dim) {
        throw ShapeMismatch("backward LSTM shape differs from the model spec");
      }
      [[fallthrough]];
    case ModelKind::Lstm:
      lstm.validate();
      if (lstm.hidden() != spec.hidden || lstm.input_dim() != input_dim) {
        throw ShapeMismatch("LSTM shape differs from the model spec");
      }
      break;
    case ModelKind::MiniConv:
      if (static_cast<Eigen::Index>(conv.kernels.size()) != kConvFilters || conv.bias.size() != kConvFilters) {
        throw ShapeMismatch("MiniConv needs 8 filters");
      }
      for (const auto& k : conv.kernels) {
        if (k.rows() != kConvKernel || k.cols() != kConvKernel) throw ShapeMismatch("MiniConv kernels are 3x3");
      }
      break;
  }
  for (const auto& t : tensors()) {
    for (double v : t.values) {
      if (!std::isfinite(v)) throw ShapeMismatch("non-finite value in " + t.name);
    }
  }
}

ModelParams init_params(const ModelSpec& spec, Eigen::Index input_dim) {
  if (input_dim < 1) throw ConfigError("input_dim must be positive");
  if (spec.hidden < 1) throw ConfigError("hidden size must be positive");

  ModelParams p;
  p.spec = spec;
  p.input_dim = input_dim;
  Rng rng(spec.init_seed);
  auto fill = [&rng](auto& m, double fan_in) {
    const double s = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-s, s);
    }
  };
  auto make_lstm = [&]() {
    LstmParams lstm = LstmParams::zeros(spec.hidden, input_dim);
    const auto fan_in = static_cast<double>(spec.hidden + input_dim);
    fill(lstm.weights, fan_in);
    fill(lstm.bias, fan_in);
    lstm.gate_bias(Gate::Forget).setOnes();
    return lstm;
  };

  switch (spec.kind) {
    case ModelKind::Lstm: p.lstm = make_lstm(); break;
    case ModelKind::BiLstm:
      p.lstm = make_lstm();
      p.lstm_backward = make_lstm();
      break;
    case ModelKind::MiniConv:
      p.conv.kernels.assign(kConvFilters, Eigen::MatrixXd(kConvKernel, kConvKernel));
      for (auto& k : p.conv.kernels) fill(k, static_cast<double>(kConvKernel * kConvKernel));
      p.conv.bias.resize(kConvFilters);
      fill(p.conv.bias, static_cast<double>(kConvKernel * kConvKernel));
      break;
  }
  p.head.weights.resize(spec.head_width());
  fill(p.head.weights, static_cast<double>(spec.head_width()));
  const double s = 1.0 / std::sqrt(static_cast<double>(spec.head_width()));
  p.head.bias = rng.uniform(-s, s);
  return p;
}

ForwardPass forward_pass(const ModelParams& params, const Eigen::MatrixXd& input) {
  if (input.cols() != params.input_dim) {
    throw ShapeMismatch("input width " + std::to_string(input.cols()) + " differs from model input " +
                        std::to_string(params.input_dim));
  }
  if (input.rows() < 1) throw ShapeMismatch("input has no time steps");

  ForwardPass pass;
  switch (params.spec.kind) {
    case ModelKind::Lstm:
      pass.forward_lstm = lstm_forward(input, params.lstm);
      pass.head_input = pass.forward_lstm.final_state().h;
      break;
    case ModelKind::BiLstm: {
      BiLstmCache run = bilstm_run(input, params.lstm, params.lstm_backward);
      pass.forward_lstm = std::move(run.forward);
      pass.backward_lstm = std::move(run.backward);
      pass.head_input.resize(params.spec.head_width());
      pass.head_input << pass.forward_lstm.final_state().h, pass.backward_lstm.final_state().h;
      break;
    }
    case ModelKind::MiniConv: {
      pass.input = input;
      pass.head_input.resize(kConvFilters);
      for (Eigen::Index k = 0; k < kConvFilters; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        Eigen::MatrixXd a = conv2d(input, params.conv.kernels[idx], params.conv.bias(k)).array().tanh().matrix();
        pass.head_input(k) = a.mean();
        pass.activations.push_back(std::move(a));
      }
      break;
    }
  }
  pass.logit = params.head.weights.dot(pass.head_input) + params.head.bias;
  pass.probability = sigmoid(pass.logit);
  return pass;
}

double forward(const ModelParams& params, const Eigen::MatrixXd& input) {
  return forward_pass(params, input).probability;
}

double forward(const ModelParams& params, const FusedInput& input) { return forward(params, input.frames); }

void backward_accumulate(const ModelParams& params, const ForwardPass& pass, double upstream,
                         ParamGrads& grads) {
  const double p = pass.probability;
  const double dlogit = upstream * p * (1.0 - p);
  grads.head.weights += dlogit * pass.head_input.transpose();
  grads.head.bias += dlogit;
  const Eigen::VectorXd dhead = dlogit * params.head.weights.transpose();
  const Eigen::Index h = params.spec.hidden;

  switch (params.spec.kind) {
    case ModelKind::Lstm: {
      Eigen::MatrixXd upstream_hidden = Eigen::MatrixXd::Zero(h, pass.forward_lstm.steps());
      upstream_hidden.rightCols(1) = dhead;
      lstm_backward(params.lstm, pass.forward_lstm, upstream_hidden, grads.lstm);
      break;
    }
    case ModelKind::BiLstm: {
      const Eigen::Index steps = pass.forward_lstm.steps();
      Eigen::MatrixXd up_fwd = Eigen::MatrixXd::Zero(h, steps);
      Eigen::MatrixXd up_bwd = Eigen::MatrixXd::Zero(h, steps);
      up_fwd.rightCols(1) = dhead.head(h);
      up_bwd.rightCols(1) = dhead.tail(h);
      lstm_backward(params.lstm, pass.forward_lstm, up_fwd, grads.lstm);
      lstm_backward(params.lstm_backward, pass.backward_lstm, up_bwd, grads.lstm_backward);
      break;
    }
    case ModelKind::MiniConv: {
      for (Eigen::Index k = 0; k < kConvFilters; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const Eigen::MatrixXd& a = pass.activations[idx];
        const double dpool = dhead(k) / static_cast<double>(a.size());
        const Eigen::MatrixXd dz = (dpool * (1.0 - a.array().square())).matrix();
        grads.conv.kernels[idx] += conv2d_kernel_grad(pass.input, dz, kConvKernel, kConvKernel);
        grads.conv.bias(k) += dz.sum();
      }
      break;
    }
  }
}

ParamGrads backward(const ModelParams& params, const ForwardPass& pass, double upstream) {
  ParamGrads grads = params.zeros_like();
  backward_accumulate(params, pass, upstream, grads);
  return grads;
}

ParamGrads backward(const ModelParams& params, const Eigen::MatrixXd& input, double upstream) {
  return backward(params, forward_pass(params, input), upstream);
}

void accumulate(ParamGrads& dst, const ParamGrads& src, double scale) {
  auto d = dst.tensors();
  const auto s = src.tensors();
  if (d.size() != s.size()) throw ShapeMismatch("gradient structures differ");
  for (std::size_t t = 0; t < d.size(); ++t) {
    if (d[t].values.size() != s[t].values.size()) throw ShapeMismatch("gradient tensor " + d[t].name + " differs");
    for (std::size_t i = 0; i < d[t].values.size(); ++i) d[t].values[i] += scale * s[t].values[i];
  }
}

}  // namespace trialsense
