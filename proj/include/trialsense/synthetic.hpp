// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/dataset.hpp"
#include "trialsense/embeddings.hpp"
#include "trialsense/landmarks.hpp"
#include "trialsense/sample_features.hpp"
#include "trialsense/wav.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace trialsense {

/// Knobs of the synthetic trial generator.
///
/// Every sample draws three independent latent scores s_V, s_A, s_T ~ N(0, 1)
/// and is deceptive iff s_V + s_A + s_T > 0, so each modality alone carries a
/// third of the label signal while all three together determine it. The
/// scores surface as:
///   visual: lower-lip points displaced by lip_shift * s_V inter-ocular units
///           (chin by half that)
///   audio:  voiced signal with amplitude base_amplitude * exp(s_A / 2) and
///           upper harmonics growing with s_A
///   text:   the first text_signal_dims embedding dims are text_shift * s_T
///           plus N(0, text_token_noise); the rest are N(0, 1)
/// on top of per-sample nuisance (pose, pitch, token noise). Classes are kept
/// balanced (deceptive gets the extra sample when n is odd).
struct SyntheticOptions {
  std::size_t samples = 120;
  std::uint64_t seed = 0;
  double audio_seconds = 1.0;
  std::size_t landmark_frames = 48;
  double fps = 30.0;
  std::size_t text_tokens = 16;
  std::size_t text_dim = 32;  // below the canonical 768 to keep CPU training short
  std::size_t text_signal_dims = 16;
  double lip_shift = 0.08;
  double base_amplitude = 0.05;
  double text_shift = 1.0;
  double text_token_noise = 0.25;

  /// Throws ConfigError.
  void validate() const;
};

struct SyntheticSample {
  std::string id;
  Label label = Label::Truthful;
  std::array<double, 3> latent{};  // s_V, s_A, s_T
  LandmarkSequence landmarks;
  AudioSignal audio;
  EmbeddingMatrix text;
};

std::vector<SyntheticSample> generate_synthetic(const SyntheticOptions& options);

/// Writes <id>.wav, <id>.landmarks.csv, <id>.emb.txt and manifest.json into
/// dir (created if needed). Returns the manifest as loaded back from disk.
DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir,
                                        const std::vector<SyntheticSample>& samples);

/// Featurizes in memory, skipping the file round trip.
SampleFeatures featurize(const SyntheticSample& sample, const MfccConfig& mfcc = {});

/// Small linearly separable set for overfitting checks: n samples of length
/// `steps` and width `dim` whose first column is the label (0 or 1) plus
/// N(0, noise) and whose remaining columns are N(0, 1). Carried as the audio
/// modality.
std::vector<SampleFeatures> make_separable_set(std::size_t n, std::size_t steps, Eigen::Index dim,
                                               double noise, std::uint64_t seed);

}  // namespace trialsense
