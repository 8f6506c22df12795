// SPDX-License-Identifier: Apache-2.0
#include "trialsense/train.hpp"

#include "trialsense/error.hpp"
#include "trialsense/json_util.hpp"
#include "trialsense/rng.hpp"
#include "trialsense/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trialsense {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (target_len < 1) throw ConfigError("target_len must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"epochs", cfg.epochs},
          {"learning_rate", cfg.learning_rate},
          {"batch_size", cfg.batch_size},
          {"seed", cfg.seed},
          {"target_len", cfg.target_len},
          {"adam", {{"beta1", cfg.beta1}, {"beta2", cfg.beta2}, {"epsilon", cfg.epsilon}}}};
}

namespace {

template <class T>
void read_key(const nlohmann::json& doc, const char* key, T& out) {
  const auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!is_count(*it)) throw ConfigError(std::string(key) + " must be a non-negative integer");
    } else {
      if (!it->is_number()) throw ConfigError(std::string(key) + " must be a number");
    }
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("bad value for ") + key);
  }
}

}  // namespace

void update_from_json(TrainConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("training config must be a JSON object");
  read_key(doc, "epochs", cfg.epochs);
  read_key(doc, "learning_rate", cfg.learning_rate);
  read_key(doc, "batch_size", cfg.batch_size);
  read_key(doc, "seed", cfg.seed);
  read_key(doc, "target_len", cfg.target_len);
  if (const auto it = doc.find("adam"); it != doc.end()) {
    if (!it->is_object()) throw ConfigError("adam must be an object");
    read_key(*it, "beta1", cfg.beta1);
    read_key(*it, "beta2", cfg.beta2);
    read_key(*it, "epsilon", cfg.epsilon);
  }
}

BceResult bce_loss(double probability, Label label) {
  const double p = std::clamp(probability, kProbabilityClamp, 1.0 - kProbabilityClamp);
  if (label == Label::Deceptive) return {-std::log(p), -1.0 / p};
  return {-std::log(1.0 - p), 1.0 / (1.0 - p)};
}

AdamState AdamState::fresh(const ModelParams& params) {
  return {0, params.zeros_like(), params.zeros_like()};
}

void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, const TrainConfig& cfg) {
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.first.tensors();
  auto v = state.second.tensors();
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw ShapeMismatch("Adam: gradient or moment structure differs from parameters");
  }
  for (std::size_t t = 0; t < p.size(); ++t) {
    const std::size_t n = p[t].values.size();
    if (g[t].values.size() != n || m[t].values.size() != n || v[t].values.size() != n) {
      throw ShapeMismatch("Adam: tensor " + p[t].name + " differs in size");
    }
  }

  ++state.step;
  const double step = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, step);
  const double c2 = 1.0 - std::pow(cfg.beta2, step);
  for (std::size_t t = 0; t < p.size(); ++t) {
    auto pv = p[t].values;
    auto gv = g[t].values;
    auto mv = m[t].values;
    auto vv = v[t].values;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = cfg.beta1 * mv[i] + (1.0 - cfg.beta1) * gv[i];
      vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / c1;
      const double v_hat = vv[i] / c2;
      pv[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

ModalityStats compute_modality_stats(std::span<const FeatureSequence> seqs) {
  if (seqs.empty()) throw EmptyTrainingSet("no sequences to compute statistics from");
  const Eigen::Index dim = seqs.front().dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  double count = 0.0;
  for (const auto& s : seqs) {
    if (s.dim() != dim) throw ShapeMismatch("sequences disagree on feature width");
    sum += s.frames.colwise().sum().transpose();
    count += static_cast<double>(s.length());
  }
  if (count == 0.0) throw EmptyTrainingSet("sequences contain no frames");
  ModalityStats stats;
  stats.mean = sum / count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
  for (const auto& s : seqs) {
    sq += (s.frames.rowwise() - stats.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  stats.std = (sq / count).array().sqrt().matrix();
  return stats;
}

NormStats compute_norm_stats(std::span<const SampleFeatures> train, ModalityCombo combo,
                             std::size_t target_len) {
  if (train.empty()) throw EmptyTrainingSet("training split is empty");
  NormStats out;
  for (Modality m : combo.modalities()) {
    std::vector<FeatureSequence> resampled;
    resampled.reserve(train.size());
    for (const auto& s : train) resampled.push_back(resample_sequence(s.at(m), target_len));
    out.per_modality.emplace(m, compute_modality_stats(resampled));
  }
  return out;
}

FusedInput prepare_input(const SampleFeatures& sample, ModalityCombo combo, std::size_t target_len,
                         const NormStats& norm) {
  std::vector<FeatureSequence> seqs;
  for (Modality m : combo.modalities()) seqs.push_back(sample.at(m));
  return fuse(seqs, combo, target_len, norm);
}

// ---- checkpoint ----

namespace {

constexpr const char* kCheckpointFormat = "trialsense-checkpoint";
constexpr int kCheckpointVersion = 1;

const nlohmann::json& require(const nlohmann::json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw MalformedCheckpoint(std::string("missing key '") + key + "'");
  return *it;
}

template <class T>
T get_as(const nlohmann::json& doc, const char* key) {
  try {
    return require(doc, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedCheckpoint(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : ckpt.params.tensors()) {
    tensors.push_back({{"name", t.name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"data", std::vector<double>(t.values.begin(), t.values.end())}});
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"spec",
           {{"kind", model_kind_name(ckpt.params.spec.kind)},
            {"hidden", ckpt.params.spec.hidden},
            {"input_dim", ckpt.params.input_dim},
            {"init_seed", ckpt.params.spec.init_seed}}},
          {"combo", ckpt.combo.token()},
          {"target_len", ckpt.target_len},
          {"norm_stats", norm_stats_to_json(ckpt.norm)},
          {"config", ckpt.config},
          {"tensors", tensors}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw MalformedCheckpoint("document is not an object");
  if (get_as<std::string>(doc, "format") != kCheckpointFormat) throw MalformedCheckpoint("unknown format tag");
  const int version = get_as<int>(doc, "version");
  if (version != kCheckpointVersion) throw MalformedCheckpoint("unsupported version " + std::to_string(version));

  const auto& spec_doc = require(doc, "spec");
  ModelSpec spec;
  const auto kind = parse_model_kind(get_as<std::string>(spec_doc, "kind"));
  if (!kind) throw MalformedCheckpoint("unknown model kind");
  spec.kind = *kind;
  spec.hidden = get_as<Eigen::Index>(spec_doc, "hidden");
  spec.init_seed = get_as<std::uint64_t>(spec_doc, "init_seed");
  const auto input_dim = get_as<Eigen::Index>(spec_doc, "input_dim");
  if (spec.hidden < 1 || input_dim < 1) throw MalformedCheckpoint("hidden and input_dim must be positive");

  std::optional<ModalityCombo> combo;
  try {
    combo = ModalityCombo::parse(get_as<std::string>(doc, "combo"));
  } catch (const ConfigError& e) {
    throw MalformedCheckpoint(e.what());
  }

  ModelParams params = init_params(spec, input_dim).zeros_like();
  auto views = params.tensors();
  const auto& tensors = require(doc, "tensors");
  if (!tensors.is_array() || tensors.size() != views.size()) {
    throw MalformedCheckpoint("expected " + std::to_string(views.size()) + " tensors");
  }
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& t = tensors[i];
    const auto name = get_as<std::string>(t, "name");
    if (name != views[i].name) throw MalformedCheckpoint("tensor " + std::to_string(i) + " is '" + name +
                                                         "', expected '" + views[i].name + "'");
    if (get_as<Eigen::Index>(t, "rows") != views[i].rows || get_as<Eigen::Index>(t, "cols") != views[i].cols) {
      throw MalformedCheckpoint("tensor '" + name + "' has the wrong shape");
    }
    const auto data = get_as<std::vector<double>>(t, "data");
    if (data.size() != views[i].values.size()) throw MalformedCheckpoint("tensor '" + name + "' has the wrong size");
    std::copy(data.begin(), data.end(), views[i].values.begin());
  }
  try {
    params.validate();
  } catch (const ShapeMismatch& e) {
    throw MalformedCheckpoint(e.what());
  }

  Checkpoint ckpt{std::move(params), *combo, norm_stats_from_json(require(doc, "norm_stats")),
                  get_as<std::size_t>(doc, "target_len"), require(doc, "config")};
  if (ckpt.target_len < 1) throw MalformedCheckpoint("target_len must be positive");
  return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, checkpoint_to_json(ckpt).dump(1) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedCheckpoint(path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

// ---- training ----

TrainResult train(const ModelSpec& spec, ModalityCombo combo, std::span<const SampleFeatures> train_samples,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_samples.empty()) throw EmptyTrainingSet("no training samples");
  for (const auto& s : train_samples) {
    for (Modality m : combo.modalities()) (void)s.at(m);
  }

  NormStats norm = compute_norm_stats(train_samples, combo, cfg.target_len);
  std::vector<Eigen::MatrixXd> inputs;
  inputs.reserve(train_samples.size());
  for (const auto& s : train_samples) inputs.push_back(prepare_input(s, combo, cfg.target_len, norm).frames);

  ModelParams params = init_params(spec, inputs.front().cols());
  AdamState adam = AdamState::fresh(params);
  ParamGrads grads = params.zeros_like();
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(train_samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{Checkpoint{params, combo, norm, cfg.target_len, {}}, {}};
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& t : grads.tensors()) std::fill(t.values.begin(), t.values.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        const ForwardPass pass = forward_pass(params, inputs[idx]);
        const BceResult bce = bce_loss(pass.probability, train_samples[idx].label);
        batch_loss += bce.loss;
        backward_accumulate(params, pass, bce.dloss_dp * scale, grads);
      }
      if (!std::isfinite(batch_loss)) throw NonFiniteLoss(epoch, batch_index);
      for (const auto& t : grads.tensors()) {
        for (double g : t.values) {
          if (!std::isfinite(g)) throw NonFiniteLoss(epoch, batch_index);
        }
      }
      epoch_loss += batch_loss;
      adam_step(params, grads, adam, cfg);
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (decide(forward(params, inputs[i])) == train_samples[i].label) ++correct;
    }
    const auto n = static_cast<double>(inputs.size());
    result.history.push_back({epoch, epoch_loss / n, static_cast<double>(correct) / n});
  }
  result.checkpoint.params = std::move(params);
  return result;
}

// ---- evaluation ----

double Metrics::accuracy() const {
  const std::size_t total = n();
  if (total == 0) return 0.0;
  return static_cast<double>(true_positive + true_negative) / static_cast<double>(total);
}

Label decide(double probability) { return probability >= 0.5 ? Label::Deceptive : Label::Truthful; }

Metrics metrics_from_predictions(std::span<const Prediction> predictions) {
  Metrics m;
  for (const auto& p : predictions) {
    const bool pred_pos = p.predicted == Label::Deceptive;
    const bool true_pos = p.label == Label::Deceptive;
    if (pred_pos && true_pos) ++m.true_positive;
    else if (pred_pos) ++m.false_positive;
    else if (true_pos) ++m.false_negative;
    else ++m.true_negative;
  }
  return m;
}

Evaluation evaluate(const Checkpoint& ckpt, std::span<const SampleFeatures> samples) {
  Evaluation out;
  out.predictions.reserve(samples.size());
  for (const auto& s : samples) {
    const FusedInput input = prepare_input(s, ckpt.combo, ckpt.target_len, ckpt.norm);
    const double p = forward(ckpt.params, input);
    out.predictions.push_back({s.id, p, decide(p), s.label});
  }
  out.metrics = metrics_from_predictions(out.predictions);
  return out;
}

std::string format_predictions_csv(std::span<const Prediction> predictions) {
  std::string out = "sample_id,probability,predicted,label\n";
  for (const auto& p : predictions) {
    out += p.sample_id;
    out += ',';
    out += format_real(p.probability, 17);
    out += ',';
    out += label_name(p.predicted);
    out += ',';
    out += label_name(p.label);
    out += '\n';
  }
  return out;
}

std::vector<Prediction> parse_predictions_csv(std::string_view text) {
  std::vector<Prediction> out;
  bool header = true;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      if (line != "sample_id,probability,predicted,label") throw MalformedManifest("prediction dump header");
      header = false;
      continue;
    }
    const auto cols = split(line, ',');
    Prediction p;
    const auto predicted = cols.size() == 4 ? parse_label(cols[2]) : std::nullopt;
    const auto label = cols.size() == 4 ? parse_label(cols[3]) : std::nullopt;
    if (!predicted || !label || !parse_real(cols[1], p.probability)) {
      throw MalformedManifest("prediction dump line " + std::to_string(line_no));
    }
    p.sample_id = std::string(cols[0]);
    p.predicted = *predicted;
    p.label = *label;
    out.push_back(std::move(p));
  }
  if (header) throw MalformedManifest("prediction dump is empty");
  return out;
}

}  // namespace trialsense
