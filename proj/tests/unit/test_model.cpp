// SPDX-License-Identifier: Apache-2.0
#include "trialsense/error.hpp"
#include "trialsense/gradcheck.hpp"
#include "trialsense/model.hpp"
#include "trialsense/nn.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

using namespace trialsense;

namespace {

const ModelKind kKinds[] = {ModelKind::Lstm, ModelKind::BiLstm, ModelKind::MiniConv};

std::vector<std::string> names(const ModelParams& p) {
  std::vector<std::string> out;
  for (const auto& t : p.tensors()) out.push_back(t.name);
  return out;
}

}  // namespace

TEST_CASE("model kind names round trip") {
  for (ModelKind k : kKinds) {
    CHECK(parse_model_kind(model_kind_name(k)) == k);
    CHECK(parse_model_kind(model_kind_label(k)) == k);
  }
  CHECK_FALSE(parse_model_kind("gru").has_value());
}

TEST_CASE("initialization is deterministic per seed") {
  for (ModelKind k : kKinds) {
    const ModelSpec spec{k, 6, 42};
    const ModelParams a = init_params(spec, 5);
    const ModelParams b = init_params(spec, 5);
    const ModelParams c = init_params(ModelSpec{k, 6, 43}, 5);
    const auto ta = a.tensors();
    const auto tb = b.tensors();
    const auto tc = c.tensors();
    bool same = true, differs = false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      for (std::size_t j = 0; j < ta[i].values.size(); ++j) {
        same = same && ta[i].values[j] == tb[i].values[j];
        differs = differs || ta[i].values[j] != tc[i].values[j];
      }
    }
    CHECK(same);
    CHECK(differs);
  }
}

TEST_CASE("initial values respect the fan-in bound and the forget bias") {
  const ModelParams p = init_params(ModelSpec{ModelKind::Lstm, 4, 1}, 3);
  CHECK(p.lstm.weights.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(7.0));
  CHECK((p.lstm.gate_bias(Gate::Forget).array() == 1.0).all());
  CHECK(p.lstm.gate_bias(Gate::Input).cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(7.0));
  CHECK(p.head.weights.cwiseAbs().maxCoeff() <= 0.5);

  const ModelParams b = init_params(ModelSpec{ModelKind::BiLstm, 4, 1}, 3);
  CHECK((b.lstm_backward.gate_bias(Gate::Forget).array() == 1.0).all());

  const ModelParams c = init_params(ModelSpec{ModelKind::MiniConv, 4, 1}, 3);
  REQUIRE(c.conv.kernels.size() == 8);
  for (const auto& k : c.conv.kernels) CHECK(k.cwiseAbs().maxCoeff() <= 1.0 / 3.0);
}

TEST_CASE("tensor inventory") {
  CHECK(names(init_params(ModelSpec{ModelKind::Lstm, 4, 0}, 3)) ==
        std::vector<std::string>{"lstm.weights", "lstm.bias", "head.weights", "head.bias"});
  CHECK(names(init_params(ModelSpec{ModelKind::BiLstm, 4, 0}, 3)) ==
        std::vector<std::string>{"lstm_fwd.weights", "lstm_fwd.bias", "lstm_bwd.weights", "lstm_bwd.bias",
                                 "head.weights", "head.bias"});
  const ModelParams c = init_params(ModelSpec{ModelKind::MiniConv, 4, 0}, 3);
  CHECK(c.tensors().size() == 11);
  CHECK(c.parameter_count() == 8 * 9 + 8 + 8 + 1);
  const ModelParams l = init_params(ModelSpec{ModelKind::Lstm, 4, 0}, 3);
  CHECK(l.parameter_count() == 16 * 7 + 16 + 4 + 1);
  CHECK(ModelSpec{ModelKind::BiLstm, 5, 0}.head_width() == 10);
  CHECK(ModelSpec{ModelKind::MiniConv, 5, 0}.head_width() == 8);
}

TEST_CASE("LSTM classifier equals sigmoid(head . final hidden)") {
  const ModelParams p = init_params(ModelSpec{ModelKind::Lstm, 3, 9}, 2);
  const Eigen::MatrixXd x = testing::random_matrix(7, 2, 3);
  LstmState s = LstmState::zeros(3);
  for (Eigen::Index t = 0; t < 7; ++t) s = lstm_cell(x.row(t).transpose(), s, p.lstm);
  const double expected = 1.0 / (1.0 + std::exp(-(p.head.weights.dot(s.h.transpose()) + p.head.bias)));
  CHECK(forward(p, x) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("BiLSTM head reads both directions after a full pass") {
  const ModelParams p = init_params(ModelSpec{ModelKind::BiLstm, 3, 9}, 2);
  const Eigen::MatrixXd x = testing::random_matrix(6, 2, 4);
  LstmState f = LstmState::zeros(3), b = LstmState::zeros(3);
  for (Eigen::Index t = 0; t < 6; ++t) f = lstm_cell(x.row(t).transpose(), f, p.lstm);
  for (Eigen::Index t = 5; t >= 0; --t) b = lstm_cell(x.row(t).transpose(), b, p.lstm_backward);
  Eigen::VectorXd z(6);
  z << f.h, b.h;
  const double expected = 1.0 / (1.0 + std::exp(-(p.head.weights.dot(z.transpose()) + p.head.bias)));
  CHECK(forward(p, x) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("MiniConv equals the naive conv, tanh, mean pool, dense") {
  const ModelParams p = init_params(ModelSpec{ModelKind::MiniConv, 4, 9}, 5);
  const Eigen::MatrixXd x = testing::random_matrix(10, 5, 5);
  double logit = p.head.bias;
  for (int f = 0; f < 8; ++f) {
    double pool = 0.0;
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 3; ++j) {
        double acc = p.conv.bias(f);
        for (int m = 0; m < 3; ++m) {
          for (int n = 0; n < 3; ++n) acc += p.conv.kernels[f](m, n) * x(i + m, j + n);
        }
        pool += std::tanh(acc);
      }
    }
    logit += p.head.weights(f) * pool / 24.0;
  }
  CHECK(forward(p, x) == doctest::Approx(1.0 / (1.0 + std::exp(-logit))).epsilon(1e-13));
}

TEST_CASE("analytic gradients agree with central differences") {
  for (ModelKind k : kKinds) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const GradCheckCase c = standard_gradcheck_case(k, seed);
      const GradCheckReport r = gradient_check(c.params, c.input, 1e-5);
      CAPTURE(model_kind_name(k));
      CAPTURE(r.worst.tensor);
      CHECK(r.checked == c.params.parameter_count());
      CHECK(r.passed(1e-4));
    }
  }
}

TEST_CASE("gradient checker flags a wrong gradient") {
  const GradCheckCase c = standard_gradcheck_case(ModelKind::Lstm, 0);
  ParamGrads wrong = backward(c.params, c.input, 1.0);
  wrong.head.bias *= 1.5;
  const GradCheckReport r = compare_gradients(c.params, c.input, wrong, 1e-5);
  CHECK_FALSE(r.passed(1e-4));
  CHECK(r.worst.tensor == "head.bias");
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == 0.5);
  CHECK_THROWS_AS(gradient_check(c.params, c.input, 0.0), ConfigError);
}

TEST_CASE("accumulate scales and adds") {
  const ModelParams p = init_params(ModelSpec{ModelKind::Lstm, 2, 0}, 2);
  ParamGrads g = p.zeros_like();
  accumulate(g, p, 2.0);
  accumulate(g, p, -1.0);
  CHECK((g.lstm.weights - p.lstm.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.head.bias == p.head.bias);
  const ModelParams other = init_params(ModelSpec{ModelKind::Lstm, 3, 0}, 2);
  CHECK_THROWS_AS(accumulate(g, other), ShapeMismatch);
}

TEST_CASE("input width mismatches are rejected") {
  const ModelParams p = init_params(ModelSpec{ModelKind::Lstm, 2, 0}, 3);
  CHECK_THROWS_AS(forward(p, testing::random_matrix(4, 2, 0)), ShapeMismatch);
  const ModelParams c = init_params(ModelSpec{ModelKind::MiniConv, 2, 0}, 3);
  CHECK_THROWS_AS(forward(c, testing::random_matrix(2, 3, 0)), KernelTooLarge);
  ModelParams broken = p;
  broken.head.weights.resize(5);
  CHECK_THROWS_AS(broken.validate(), ShapeMismatch);
}

TEST_CASE("MiniConv gradient check at eps 1e-4 stays under 1e-5") {
  const GradCheckCase c = standard_gradcheck_case(ModelKind::MiniConv, 0);
  REQUIRE(c.input.rows() == 16);
  REQUIRE(c.input.cols() == 8);
  CHECK(gradient_check(c.params, c.input, 1e-4).max_relative_error < 1e-5);
}

TEST_CASE("forward and backward are pure") {
  const GradCheckCase c = standard_gradcheck_case(ModelKind::BiLstm, 3);
  const ParamGrads a = backward(c.params, c.input, 1.0);
  (void)forward(c.params, testing::random_matrix(9, 3, 1));
  const ParamGrads b = backward(c.params, c.input, 1.0);
  CHECK(a.lstm.weights == b.lstm.weights);
  CHECK(a.lstm_backward.bias == b.lstm_backward.bias);
  CHECK(forward(c.params, c.input) == forward(c.params, c.input));
}
