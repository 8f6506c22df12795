// SPDX-License-Identifier: Apache-2.0
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
#include "trialsense/dataset.hpp"
#include "trialsense/dsp.hpp"
#include "trialsense/fusion.hpp"
#include "trialsense/gradcheck.hpp"
#include "trialsense/grid.hpp"
#include "trialsense/landmarks.hpp"
#include "trialsense/mfcc.hpp"
#include "trialsense/nn.hpp"
#include "trialsense/rng.hpp"
#include "trialsense/synthetic.hpp"
#include "trialsense/text_io.hpp"
#include "trialsense/train.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

using namespace trialsense;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::string only;  // run a single criterion when set

void report(const std::string& name, const std::function<Outcome()>& check) {
  if (!only.empty() && name != only) return;
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s  %-24s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string parts;
  for (ModelKind k : {ModelKind::Lstm, ModelKind::BiLstm, ModelKind::MiniConv}) {
    const GradCheckCase c = standard_gradcheck_case(k, 0);
    const GradCheckReport r = gradient_check(c.params, c.input, 1e-4);
    worst = std::max(worst, r.max_relative_error);
    parts += fmt("%s=%.2e ", std::string(model_kind_name(k)).c_str(), r.max_relative_error);
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-4 && elapsed < 10.0, parts + fmt("(%.2fs)", elapsed)};
}

Outcome dsp_oracle() {
  constexpr std::size_t n = 512;
  Rng rng(2024);
  const Fft plan(n);
  double spectrum_err = 0.0;
  std::vector<double> frame(n);
  for (int trial = 0; trial < 1000; ++trial) {
    for (double& v : frame) v = rng.uniform(-1.0, 1.0);
    const std::vector<double> fast = power_spectrum(frame, n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        acc += frame[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) / n);
      }
      spectrum_err = std::max(spectrum_err, std::abs(fast[k] - std::norm(acc)));
    }
  }

  double dct_err = 0.0;
  for (std::size_t size : {13u, 26u, 40u}) {
    const Dct2 dct(size);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd x = testing::random_matrix(static_cast<Eigen::Index>(size), 1, 100 + trial).col(0);
      dct_err = std::max(dct_err, (dct.inverse(dct.forward(x)) - x).cwiseAbs().maxCoeff());
    }
  }

  AudioSignal silence;
  silence.samples.assign(16000, 0.0);
  const FeatureSequence f = extract_mfcc(silence);
  const double silence_err = f.frames.rightCols(12).cwiseAbs().maxCoeff();

  return {spectrum_err < 1e-9 && dct_err < 1e-9 && silence_err < 1e-9,
          fmt("dft=%.1e dct=%.1e silence=%.1e", spectrum_err, dct_err, silence_err)};
}

Outcome mfcc_framing() {
  AudioSignal one_second;
  Rng rng(1);
  one_second.samples.resize(16000);
  for (double& v : one_second.samples) v = rng.uniform(-0.5, 0.5);
  const FeatureSequence f = extract_mfcc(one_second);
  return {f.length() == 98 && f.dim() == 13, fmt("%ld x %ld", static_cast<long>(f.length()), static_cast<long>(f.dim()))};
}

Outcome lstm_hand_case() {
  const LstmParams p = LstmParams::zeros(1, 1);
  const LstmState prev{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  const double h = lstm_cell(Eigen::VectorXd::Zero(1), prev, p).h(0);
  const double err = std::abs(h - 0.5 * std::tanh(0.5));
  return {err < 1e-9 && std::abs(h - 0.2310586) < 1e-7, fmt("h=%.10f err=%.1e", h, err)};
}

Outcome invariance_suite() {
  Rng rng(99);
  double landmark_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    LandmarkSequence seq;
    seq.fps = 30.0;
    for (int f = 0; f < 4; ++f) {
      LandmarkFrame frame;
      for (auto& pt : frame.points) pt = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      frame.points[36] = {-0.5 + 0.01 * f, 0.0};
      frame.points[45] = {0.5, 0.0};
      seq.frames.push_back(frame);
    }
    LandmarkSequence moved = seq;
    const double s = rng.uniform(0.05, 20.0);
    const double tx = rng.uniform(-1000.0, 1000.0), ty = rng.uniform(-1000.0, 1000.0);
    for (auto& frame : moved.frames) {
      for (auto& pt : frame.points) pt = {s * pt.x + tx, s * pt.y + ty};
    }
    landmark_err = std::max(landmark_err, (landmarks_to_features(seq).frames - landmarks_to_features(moved).frames)
                                              .cwiseAbs()
                                              .maxCoeff());
  }

  const std::vector<FeatureSequence> seqs{{Modality::Visual, testing::random_matrix(64, 136, 1), 30.0},
                                          {Modality::Audio, testing::random_matrix(64, 13, 2), 100.0},
                                          {Modality::Text, testing::random_matrix(64, 32, 3), 0.0}};
  const FusedInput fused =
      fuse(seqs, ModalityCombo{Modality::Visual, Modality::Audio, Modality::Text}, 64, NormStats::identity());
  const bool blocks = fused.frames.cols() == 181 && fused.frames.leftCols(136) == seqs[0].frames &&
                      fused.frames.middleCols(136, 13) == seqs[1].frames &&
                      fused.frames.rightCols(32) == seqs[2].frames;

  const FeatureSequence same = resample_sequence(seqs[1], 64);
  const bool resample_identity = same.frames == seqs[1].frames;

  return {landmark_err < 1e-9 && blocks && resample_identity,
          fmt("landmark dmax=%.1e blocks=%s resample=%s", landmark_err, blocks ? "ok" : "bad",
              resample_identity ? "ok" : "bad")};
}

Outcome determinism(const std::string& cli, const std::filesystem::path& manifest) {
  testing::TempDir dir("accept_det");
  const auto t0 = Clock::now();
  for (const char* name : {"a", "b"}) {
    const std::string cmd = "\"" + cli + "\" grid --manifest \"" + manifest.string() + "\" --seed 0 -o \"" +
                            (dir / (std::string(name) + ".json")).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "grid command failed: " + cmd};
  }
  const std::string a = read_file(dir / "a.json");
  const std::string b = read_file(dir / "b.json");
  return {!a.empty() && a == b, fmt("%zu bytes, identical=%s (%.0fs)", a.size(), a == b ? "yes" : "no",
                                    seconds_since(t0))};
}

// Logistic regression by full-batch gradient descent; returns training accuracy.
double logistic_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::MatrixXd xb(x.rows(), x.cols() + 1);
  xb << x, Eigen::VectorXd::Ones(x.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(xb.cols());
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd p = (1.0 + (-(xb * w)).array().exp()).inverse().matrix();
    w -= 0.5 * xb.transpose() * (p - y) / static_cast<double>(x.rows());
  }
  const Eigen::VectorXd p = (1.0 + (-(xb * w)).array().exp()).inverse().matrix();
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) correct += (p(i) >= 0.5) == (y(i) > 0.5);
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

Outcome synthetic_separability() {
  const auto t0 = Clock::now();
  const ModalityCombo v{Modality::Visual}, a{Modality::Audio}, t{Modality::Text};
  const ModalityCombo vat{Modality::Visual, Modality::Audio, Modality::Text};
  // Each latent alone predicts the sign of the sum with probability 1/2 + asin(1/sqrt 3)/pi.
  const double bayes_single = 0.5 + std::asin(1.0 / std::sqrt(3.0)) / std::numbers::pi;

  std::size_t seeds_ok = 0;
  bool oracle_ok = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SyntheticOptions opts;
    opts.samples = 120;
    opts.seed = seed;
    const auto samples = generate_synthetic(opts);

    Eigen::MatrixXd latent(120, 3);
    Eigen::VectorXd y(120);
    for (std::size_t i = 0; i < 120; ++i) {
      for (int m = 0; m < 3; ++m) latent(static_cast<Eigen::Index>(i), m) = samples[i].latent[m];
      y(static_cast<Eigen::Index>(i)) = samples[i].label == Label::Deceptive ? 1.0 : 0.0;
    }
    double single_max = 0.0, single_min = 1.0;
    for (int m = 0; m < 3; ++m) {
      const double acc = logistic_oracle(latent.col(m), y);
      single_max = std::max(single_max, acc);
      single_min = std::min(single_min, acc);
    }
    const double joint = logistic_oracle(latent, y);
    oracle_ok = oracle_ok && single_min > 0.55 && single_max < 0.85 && joint >= 0.95;

    testing::TempDir dir("accept_sep");
    const DatasetManifest manifest = write_synthetic_dataset(dir.path(), samples);
    GridOptions g;
    g.train.seed = seed;
    const GridReport r = run_grid(manifest, {ModelKind::Lstm}, {v, a, t, vat}, g);
    auto acc = [&](ModalityCombo c) {
      const GridCell* cell = r.find(ModelKind::Lstm, c);
      return cell && cell->metrics ? cell->metrics->accuracy() : -1.0;
    };
    const double best_single = std::max({acc(v), acc(a), acc(t)});
    const double triple = acc(vat);
    const bool ok = triple >= best_single && triple >= 0.90;
    seeds_ok += ok;
    detail += fmt("[seed %llu oracle %.2f-%.2f/%.2f V=%.3f A=%.3f T=%.3f VAT=%.3f] ",
                  static_cast<unsigned long long>(seed), single_min, single_max, joint, acc(v), acc(a), acc(t),
                  triple);
  }
  const double elapsed = seconds_since(t0);
  detail += fmt("bayes-single=%.3f %zu/3 seeds (%.0fs)", bayes_single, seeds_ok, elapsed);
  return {oracle_ok && seeds_ok >= 2 && elapsed < 300.0, detail};
}

Outcome overfit_check() {
  const auto data = make_separable_set(8, 20, 13, 0.05, 0);
  TrainConfig cfg;  // 30 epochs, lr 1e-4, batch 16
  const TrainResult r = train(ModelSpec{ModelKind::Lstm, 128, 0}, ModalityCombo{Modality::Audio}, data, cfg);
  std::size_t first = 0;
  for (const auto& e : r.history) {
    if (e.train_accuracy == 1.0) {
      first = e.epoch;
      break;
    }
  }
  const double final_acc = r.history.back().train_accuracy;
  return {final_acc == 1.0, fmt("final train accuracy %.3f, first 100%% at epoch %zu, loss %.4f -> %.4f", final_acc,
                                first, r.history.front().mean_loss, r.history.back().mean_loss)};
}

Outcome split_arithmetic() {
  DatasetManifest m;
  for (std::size_t i = 0; i < 121; ++i) {
    m.samples.push_back({"s" + std::to_string(i), "a.wav", "l.csv", "e.txt",
                         i < 61 ? Label::Deceptive : Label::Truthful});
  }
  const DatasetSplit s = split_dataset(m, SplitSpec{0.8, 0});
  std::set<std::string> ids;
  for (const auto& r : s.train) ids.insert(r.id);
  bool disjoint = true;
  for (const auto& r : s.test) disjoint = ids.insert(r.id).second && disjoint;
  return {s.train.size() == 97 && s.test.size() == 24 && disjoint && ids.size() == 121,
          fmt("%zu/%zu disjoint=%s exhaustive=%s", s.train.size(), s.test.size(), disjoint ? "yes" : "no",
              ids.size() == 121 ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : TRIALSENSE_CLI_PATH;
  const std::filesystem::path fixture = argc > 2 ? argv[2] : TRIALSENSE_FIXTURE_MANIFEST;
  if (argc > 3) only = argv[3];

  report("gradient-correctness", gradient_correctness);
  report("dsp-oracle", dsp_oracle);
  report("mfcc-framing", mfcc_framing);
  report("lstm-hand-case", lstm_hand_case);
  report("invariance-suite", invariance_suite);
  report("determinism", [&] { return determinism(cli, fixture); });
  report("synthetic-separability", synthetic_separability);
  report("overfit-check", overfit_check);
  report("split-arithmetic", split_arithmetic);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
