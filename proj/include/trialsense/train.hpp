// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/dataset.hpp"
#include "trialsense/fusion.hpp"
#include "trialsense/model.hpp"
#include "trialsense/sample_features.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trialsense {

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 1e-4;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::size_t target_len = kDefaultTargetLength;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep their current values. Throws ConfigError on bad types.
void update_from_json(TrainConfig& cfg, const nlohmann::json& doc);

inline constexpr double kProbabilityClamp = 1e-7;

/// Binary cross-entropy with y = 1 for deceptive, p clamped to [1e-7, 1 - 1e-7].
struct BceResult {
  double loss = 0.0;
  double dloss_dp = 0.0;
};
BceResult bce_loss(double probability, Label label);

/// First and second moments per parameter, same layout as the parameters.
struct AdamState {
  std::uint64_t step = 0;
  ParamGrads first;
  ParamGrads second;

  static AdamState fresh(const ModelParams& params);
};

/// One bias-corrected Adam update in place. Throws ShapeMismatch.
void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, const TrainConfig& cfg);

/// Per-dimension mean and population standard deviation pooled over every
/// frame of every sequence. Throws EmptyTrainingSet for an empty span.
ModalityStats compute_modality_stats(std::span<const FeatureSequence> seqs);

/// Stats for every modality in combo, over the given (already resampled)
/// training samples. Throws EmptyTrainingSet, MissingModality.
NormStats compute_norm_stats(std::span<const SampleFeatures> train, ModalityCombo combo,
                             std::size_t target_len);

/// A trained classifier plus everything needed to featurize new samples.
struct Checkpoint {
  ModelParams params;
  ModalityCombo combo;
  NormStats norm;
  std::size_t target_len = kDefaultTargetLength;
  /// Effective configuration and seeds, echoed verbatim.
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
/// Throws MalformedCheckpoint.
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Resample + normalize + concatenate with the checkpoint's settings.
FusedInput prepare_input(const SampleFeatures& sample, ModalityCombo combo, std::size_t target_len,
                         const NormStats& norm);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochStats> history;
};

/// Mini-batch Adam on clamped BCE. Each epoch visits the samples in a fresh
/// seeded permutation; batch gradients are the mean over the batch, summed in
/// sample order. mean_loss is the average per-sample loss seen during the
/// epoch and train_accuracy is measured after the epoch's last update.
/// Throws MissingModality, EmptyTrainingSet, NonFiniteLoss(epoch, batch), ConfigError.
TrainResult train(const ModelSpec& spec, ModalityCombo combo, std::span<const SampleFeatures> train_samples,
                  const TrainConfig& cfg);

struct Metrics {
  std::size_t true_positive = 0;   // deceptive predicted deceptive
  std::size_t false_positive = 0;  // truthful predicted deceptive
  std::size_t false_negative = 0;  // deceptive predicted truthful
  std::size_t true_negative = 0;

  std::size_t n() const { return true_positive + false_positive + false_negative + true_negative; }
  double accuracy() const;
};

struct Prediction {
  std::string sample_id;
  double probability = 0.0;
  Label predicted = Label::Truthful;
  Label label = Label::Truthful;
};

/// Deceptive iff probability >= 0.5 (ties go to deceptive).
Label decide(double probability);
Metrics metrics_from_predictions(std::span<const Prediction> predictions);

struct Evaluation {
  Metrics metrics;
  std::vector<Prediction> predictions;
};

/// Throws MissingModality, ShapeMismatch.
Evaluation evaluate(const Checkpoint& ckpt, std::span<const SampleFeatures> samples);

/// "sample_id,probability,predicted,label" with 17 significant digits.
std::string format_predictions_csv(std::span<const Prediction> predictions);
/// Throws MalformedManifest on a bad line.
std::vector<Prediction> parse_predictions_csv(std::string_view text);

}  // namespace trialsense
