// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/feature_sequence.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trialsense {

enum class Label { Truthful = 0, Deceptive = 1 };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view text);

/// One labeled trial sample. Paths are absolute (or relative to the working
/// directory) once a manifest has been loaded.
struct SampleRecord {
  std::string id;
  std::filesystem::path audio_path;
  std::filesystem::path landmarks_path;
  std::filesystem::path embedding_path;
  Label label = Label::Truthful;

  const std::filesystem::path& path_for(Modality m) const;
};

struct DatasetManifest {
  std::vector<SampleRecord> samples;

  std::size_t n_total() const { return samples.size(); }
  std::size_t n_deceptive() const;
  std::size_t n_truthful() const;
};

/// Parses the JSON manifest
///   {"samples": [{"id", "audio", "landmarks", "embedding", "label"}, ...]}
/// Relative paths are resolved against the manifest's directory. File
/// existence is not checked here; see validate_sample().
/// Throws MalformedManifest.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);
/// Inverse of parse_manifest; paths are written relative to base_dir when possible.
std::string serialize_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;  // ConfigError unless 0 < train_fraction < 1
};

struct DatasetSplit {
  std::vector<SampleRecord> train;
  std::vector<SampleRecord> test;
};

/// Stratified split. The train set holds round_half_up(fraction * n) samples;
/// each label class contributes floor(fraction * n_class) plus at most one of
/// the leftover slots, handed out by largest fractional remainder (ties go to
/// the deceptive class). Membership is drawn from a seeded shuffle per class;
/// both output lists keep manifest order.
/// Throws TooFewSamples when n < 2 or a label class is empty.
DatasetSplit split_dataset(const DatasetManifest& manifest, const SplitSpec& spec);

struct ModalityCheck {
  Modality modality;
  bool ok = false;
  std::string reason;  // empty when ok
};

struct ValidationResult {
  std::string sample_id;
  std::vector<ModalityCheck> checks;  // Visual, Audio, Text

  bool ok() const;
};

/// Checks that each referenced file exists, is readable, and passes the header
/// check for its format. Never throws for data problems.
ValidationResult validate_sample(const SampleRecord& record);

}  // namespace trialsense
