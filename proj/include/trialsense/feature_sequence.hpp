// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace trialsense {

/// Canonical ordering Visual < Audio < Text is used wherever modalities are
/// concatenated.
enum class Modality { Visual = 0, Audio = 1, Text = 2 };

inline constexpr std::array<Modality, 3> kAllModalities = {Modality::Visual, Modality::Audio,
                                                           Modality::Text};

std::string_view modality_name(Modality m);
/// Single-letter tag used in reports and combo syntax: V, A, T.
char modality_letter(Modality m);
/// Accepts "v"/"visual", "a"/"audio", "t"/"text" (case-insensitive).
std::optional<Modality> parse_modality(std::string_view token);

/// Time-ordered T x D feature matrix for one sample and one modality.
/// frame_rate == 0 means the rows have no wall-clock rate (token sequences).
struct FeatureSequence {
  Modality modality = Modality::Visual;
  Eigen::MatrixXd frames;
  double frame_rate = 0.0;

  Eigen::Index length() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }

  /// Throws ShapeMismatch when empty or non-finite.
  void validate() const;
};

}  // namespace trialsense
