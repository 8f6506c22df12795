// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/dataset.hpp"
#include "trialsense/mfcc.hpp"
#include "trialsense/model.hpp"
#include "trialsense/train.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trialsense {

struct GridOptions {
  TrainConfig train;
  Eigen::Index hidden = 128;
  double train_fraction = 0.8;
  MfccConfig mfcc;
  /// Worker threads for independent cells. Does not affect results.
  std::size_t jobs = 1;
};

struct GridCell {
  ModelKind kind = ModelKind::Lstm;
  ModalityCombo combo{Modality::Visual};
  std::optional<Metrics> metrics;  // empty when the cell failed
  std::string error;
  std::vector<EpochStats> history;
};

struct GridReport {
  std::vector<GridCell> cells;  // kinds-major, in request order
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  /// Effective configuration (training, model, split, MFCC). No timestamps.
  nlohmann::json config;

  const GridCell* find(ModelKind kind, ModalityCombo combo) const;
  std::vector<const GridCell*> failed() const;
};

/// One stratified split (seed = options.train.seed) shared by every cell;
/// each (kind, combo) cell trains with init and shuffle seeds equal to that
/// same seed and is evaluated on the test split. Feature extraction errors
/// and training errors are recorded in the failing cells; the grid carries
/// on. Throws ConfigError for empty kinds/combos and split errors.
GridReport run_grid(const DatasetManifest& manifest, const std::vector<ModelKind>& kinds,
                    const std::vector<ModalityCombo>& combos, const GridOptions& options);

nlohmann::json grid_report_to_json(const GridReport& report);
/// Three sections: single modalities (V, T, A), pairs (A+T, V+T, V+A) and
/// the triple (V+A+T), one row per model, accuracy as a percentage with two
/// decimals. Cells outside the requested grid print "-", failed cells "ERR".
std::string render_grid_table(const GridReport& report);

}  // namespace trialsense
