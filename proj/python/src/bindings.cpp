// SPDX-License-Identifier: Apache-2.0
#include "trialsense/dataset.hpp"
#include "trialsense/error.hpp"
#include "trialsense/gradcheck.hpp"
#include "trialsense/grid.hpp"
#include "trialsense/landmarks.hpp"
#include "trialsense/mfcc.hpp"
#include "trialsense/run_config.hpp"
#include "trialsense/sample_features.hpp"
#include "trialsense/synthetic.hpp"
#include "trialsense/train.hpp"
#include "trialsense/version.hpp"
#include "trialsense/wav.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace trialsense;

namespace {

RunConfig config_from(const std::string& config_json) {
  RunConfig cfg;
  if (!config_json.empty()) update_from_json(cfg, nlohmann::json::parse(config_json));
  cfg.validate();
  return cfg;
}

ModelKind kind_from(const std::string& name) {
  const auto kind = parse_model_kind(name);
  if (!kind) throw ConfigError("unknown model '" + name + "'");
  return *kind;
}

std::vector<SampleFeatures> load_all(const std::vector<SampleRecord>& records, ModalityCombo combo,
                                     const MfccConfig& mfcc) {
  std::vector<SampleFeatures> out;
  for (const auto& r : records) out.push_back(load_sample_features(r, combo, mfcc));
  return out;
}

Eigen::MatrixXd mfcc_from_samples(const std::vector<double>& samples, int sample_rate, const std::string& config_json) {
  MfccConfig cfg;
  if (!config_json.empty()) update_from_json(cfg, nlohmann::json::parse(config_json));
  AudioSignal signal;
  signal.sample_rate = sample_rate;
  signal.samples = samples;
  return extract_mfcc(signal, cfg).frames;
}

Eigen::MatrixXd landmark_features(const Eigen::MatrixXd& rows, double fps) {
  // rows: T x 136 laid out as x1, y1, ..., x68, y68 (CSV order without the frame column)
  if (rows.cols() != static_cast<Eigen::Index>(kVisualDim)) throw ShapeMismatch("expected 136 columns");
  LandmarkSequence seq;
  seq.fps = fps;
  for (Eigen::Index t = 0; t < rows.rows(); ++t) {
    LandmarkFrame f;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      f.points[i] = {rows(t, static_cast<Eigen::Index>(2 * i)), rows(t, static_cast<Eigen::Index>(2 * i + 1))};
    }
    seq.frames.push_back(f);
  }
  return landmarks_to_features(seq).frames;
}

py::tuple read_wav_py(const std::filesystem::path& path) {
  const AudioSignal s = read_wav(path);
  return py::make_tuple(s.samples, s.sample_rate);
}

std::filesystem::path synth_py(const std::filesystem::path& dir, std::size_t samples, std::uint64_t seed,
                               double audio_seconds, std::size_t frames, std::size_t tokens, std::size_t text_dim) {
  SyntheticOptions o;
  o.samples = samples;
  o.seed = seed;
  o.audio_seconds = audio_seconds;
  o.landmark_frames = frames;
  o.text_tokens = tokens;
  o.text_dim = text_dim;
  o.text_signal_dims = std::max<std::size_t>(1, text_dim / 2);
  write_synthetic_dataset(dir, generate_synthetic(o));
  return dir / "manifest.json";
}

py::tuple split_py(const std::filesystem::path& manifest, double train_fraction, std::uint64_t seed) {
  const DatasetSplit s = split_dataset(load_manifest(manifest), SplitSpec{train_fraction, seed});
  std::vector<std::string> train, test;
  for (const auto& r : s.train) train.push_back(r.id);
  for (const auto& r : s.test) test.push_back(r.id);
  return py::make_tuple(train, test);
}

std::string train_py(const std::filesystem::path& manifest, const std::string& model, const std::string& combo_text,
                     const std::filesystem::path& output, const std::string& config_json) {
  const RunConfig cfg = config_from(config_json);
  const ModelKind kind = kind_from(model);
  const ModalityCombo combo = ModalityCombo::parse(combo_text);
  const DatasetSplit split = split_dataset(load_manifest(manifest), SplitSpec{cfg.train_fraction, cfg.train.seed});
  const auto samples = load_all(split.train, combo, cfg.mfcc);
  std::optional<TrainResult> trained;
  {
    py::gil_scoped_release release;
    trained = train(ModelSpec{kind, cfg.hidden, cfg.train.seed}, combo, samples, cfg.train);
  }
  TrainResult& r = *trained;
  r.checkpoint.config = to_json(cfg);
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : r.history) {
    history.push_back({{"epoch", e.epoch}, {"loss", e.mean_loss}, {"train_accuracy", e.train_accuracy}});
  }
  r.checkpoint.config["history"] = history;
  write_checkpoint(output, r.checkpoint);
  return history.dump();
}

std::string evaluate_py(const std::filesystem::path& ckpt_path, const std::filesystem::path& manifest, bool all) {
  const Checkpoint ckpt = read_checkpoint(ckpt_path);
  RunConfig cfg;
  nlohmann::json doc = ckpt.config;
  doc.erase("history");
  update_from_json(cfg, doc);
  const DatasetManifest m = load_manifest(manifest);
  const auto records = all ? m.samples : split_dataset(m, SplitSpec{cfg.train_fraction, cfg.train.seed}).test;
  const Evaluation ev = evaluate(ckpt, load_all(records, ckpt.combo, cfg.mfcc));
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : ev.predictions) {
    preds.push_back({{"sample_id", p.sample_id},
                     {"probability", p.probability},
                     {"predicted", label_name(p.predicted)},
                     {"label", label_name(p.label)}});
  }
  return nlohmann::json{{"accuracy", ev.metrics.accuracy()},
                        {"confusion",
                         {{"tp", ev.metrics.true_positive},
                          {"fp", ev.metrics.false_positive},
                          {"fn", ev.metrics.false_negative},
                          {"tn", ev.metrics.true_negative}}},
                        {"predictions", preds}}
      .dump();
}

std::string grid_py(const std::filesystem::path& manifest, const std::vector<std::string>& models,
                    const std::vector<std::string>& combos, const std::string& config_json, std::size_t jobs) {
  const RunConfig cfg = config_from(config_json);
  std::vector<ModelKind> kinds;
  for (const auto& m : models) kinds.push_back(kind_from(m));
  std::vector<ModalityCombo> combo_list;
  for (const auto& c : combos) combo_list.push_back(ModalityCombo::parse(c));
  if (combo_list.empty()) combo_list = ModalityCombo::all();
  GridOptions options;
  options.train = cfg.train;
  options.hidden = cfg.hidden;
  options.train_fraction = cfg.train_fraction;
  options.mfcc = cfg.mfcc;
  options.jobs = jobs;
  const DatasetManifest m = load_manifest(manifest);
  GridReport report;
  {
    py::gil_scoped_release release;
    report = run_grid(m, kinds, combo_list, options);
  }
  return grid_report_to_json(report).dump();
}

double gradcheck_py(const std::string& model, std::uint64_t seed, double eps) {
  const GradCheckCase c = standard_gradcheck_case(kind_from(model), seed);
  return gradient_check(c.params, c.input, eps).max_relative_error;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the trialsense deception-detection pipeline";
  m.attr("__version__") = std::string(kVersionString);

  static py::exception<Error> error_type(m, "TrialsenseError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("exit_code") = exit_code_for(e.kind());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("hz_to_mel", &hz_to_mel, py::arg("hz"));
  m.def("mel_to_hz", &mel_to_hz, py::arg("mel"));
  m.def("mfcc", &mfcc_from_samples, py::arg("samples"), py::arg("sample_rate") = kCanonicalSampleRate,
        py::arg("config_json") = "", "MFCC matrix (frames x coefficients) of a mono signal in [-1, 1].");
  m.def("read_wav", &read_wav_py, py::arg("path"), "Returns (samples, sample_rate).");
  m.def("landmark_features", &landmark_features, py::arg("points"), py::arg("fps") = 30.0,
        "Normalized visual features from a T x 136 array of x1, y1, ..., x68, y68.");
  m.def("split", &split_py, py::arg("manifest"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0,
        "Stratified split; returns (train_ids, test_ids).");
  m.def("synthesize", &synth_py, py::arg("directory"), py::arg("samples") = 120, py::arg("seed") = 0,
        py::arg("audio_seconds") = 1.0, py::arg("frames") = 48, py::arg("tokens") = 16, py::arg("text_dim") = 32,
        "Writes a synthetic dataset and returns the manifest path.");
  m.def("_train", &train_py, py::arg("manifest"), py::arg("model"), py::arg("combo"), py::arg("output"),
        py::arg("config_json") = "");
  m.def("_evaluate", &evaluate_py, py::arg("checkpoint"), py::arg("manifest"), py::arg("all_samples") = false);
  m.def("_grid", &grid_py, py::arg("manifest"), py::arg("models"), py::arg("combos"), py::arg("config_json") = "",
        py::arg("jobs") = 1);
  m.def("gradcheck", &gradcheck_py, py::arg("model"), py::arg("seed") = 0, py::arg("eps") = 1e-4,
        "Maximum relative gradient error of the built-in check case.");
}
