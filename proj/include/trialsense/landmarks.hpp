// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/feature_sequence.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trialsense {

inline constexpr std::size_t kLandmarkCount = 68;
inline constexpr std::size_t kVisualDim = 2 * kLandmarkCount;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// 68 facial points in the usual iBUG ordering (0-based here; the eyes are
/// 36..41 and 42..47).
struct LandmarkFrame {
  std::array<Point2, kLandmarkCount> points{};
};

struct LandmarkSequence {
  std::vector<LandmarkFrame> frames;
  double fps = 0.0;
};

/// Landmark CSV:
///   # fps=<real>
///   frame,x1,y1,...,x68,y68
///   0,<136 reals>
/// Further lines starting with '#' are ignored. Frame indices must be strictly
/// increasing. Throws MalformedLandmarks.
LandmarkSequence parse_landmarks(const std::filesystem::path& path);
LandmarkSequence parse_landmarks_text(std::string_view text);

/// Reads only the fps comment and the column header. Throws MalformedLandmarks.
double check_landmarks_header(const std::filesystem::path& path);

std::string serialize_landmarks(const LandmarkSequence& seq);
void write_landmarks(const std::filesystem::path& path, const LandmarkSequence& seq);

/// Distance between the mean of points 37-42 and the mean of points 43-48
/// (1-based).
double inter_ocular_distance(const LandmarkFrame& frame);

/// Subtracts the 68-point centroid and divides by the inter-ocular distance.
/// Rotation is left alone. Throws DegenerateFace(0) when the distance is <= 1e-9.
LandmarkFrame normalize_frame(const LandmarkFrame& frame);

/// One row per frame: normalized (x1..x68, y1..y68). D = 136, frame_rate = fps.
/// Throws DegenerateFace carrying the offending frame index.
FeatureSequence landmarks_to_features(const LandmarkSequence& seq);

}  // namespace trialsense
