// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/feature_sequence.hpp"

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trialsense {

inline constexpr std::size_t kDefaultTargetLength = 64;
inline constexpr double kNormEpsilon = 1e-8;

/// Nonempty subset of {Visual, Audio, Text}.
class ModalityCombo {
 public:
  /// Throws ConfigError for an empty set.
  explicit ModalityCombo(std::initializer_list<Modality> modalities);
  explicit ModalityCombo(std::span<const Modality> modalities);

  /// Parses "v,a,t"-style lists, order-insensitive. Throws ConfigError on an
  /// unknown token, a repeat, or an empty list.
  static ModalityCombo parse(std::string_view text);

  /// The seven combos in report order: V, T, A, A+T, V+T, V+A, V+A+T.
  static std::vector<ModalityCombo> all();

  bool contains(Modality m) const { return bits_ & bit(m); }
  std::size_t size() const;
  /// Members in canonical order Visual, Audio, Text.
  std::vector<Modality> modalities() const;
  /// Report label such as "V+A+T" (canonical order).
  std::string label() const;
  /// Lower-case CLI form, e.g. "v,a,t".
  std::string token() const;

  friend bool operator==(ModalityCombo a, ModalityCombo b) { return a.bits_ == b.bits_; }
  friend bool operator<(ModalityCombo a, ModalityCombo b) { return a.bits_ < b.bits_; }

 private:
  ModalityCombo() = default;
  static unsigned bit(Modality m) { return 1u << static_cast<unsigned>(m); }
  unsigned bits_ = 0;
};

/// Per-dimension mean/std for one modality.
struct ModalityStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Normalization statistics, computed from the training split. A modality
/// without an entry passes through fusion unnormalized.
struct NormStats {
  std::map<Modality, ModalityStats> per_modality;

  static NormStats identity() { return {}; }
};

nlohmann::json norm_stats_to_json(const NormStats& stats);
/// Throws MalformedCheckpoint on a bad document.
NormStats norm_stats_from_json(const nlohmann::json& doc);
void write_norm_stats(const std::filesystem::path& path, const NormStats& stats);
NormStats read_norm_stats(const std::filesystem::path& path);

/// Linear interpolation at positions j (T - 1) / (target_len - 1). A single
/// target frame takes the temporal mean; a single input frame is repeated.
/// Throws ConfigError for target_len == 0.
FeatureSequence resample_sequence(const FeatureSequence& seq, std::size_t target_len);

/// Early-fusion input: target_len x (sum of modality dims).
struct FusedInput {
  Eigen::MatrixXd frames;
  ModalityCombo combo;
};

/// Resamples each sequence, applies (x - mean) / (std + 1e-8) per modality
/// when stats are present, and concatenates columns in canonical order.
/// Sequences of modalities outside the combo are ignored.
/// Throws MissingModality, DuplicateModality, ShapeMismatch (stats width).
FusedInput fuse(std::span<const FeatureSequence> seqs, ModalityCombo combo, std::size_t target_len,
                const NormStats& stats);

}  // namespace trialsense
