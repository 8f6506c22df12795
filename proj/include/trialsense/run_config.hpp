// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/mfcc.hpp"
#include "trialsense/train.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace trialsense {

/// Everything a training run depends on. JSON layout:
///   {"train": {...}, "mfcc": {...}, "model": {"hidden": H},
///    "split": {"train_fraction": f}}
/// The split seed is the training seed.
struct RunConfig {
  TrainConfig train;
  MfccConfig mfcc;
  Eigen::Index hidden = 128;
  double train_fraction = 0.8;

  /// Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Overlays the keys present in doc. Unknown keys are rejected. Throws ConfigError.
void update_from_json(RunConfig& cfg, const nlohmann::json& doc);
/// Throws ConfigError for unreadable or invalid JSON.
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace trialsense
