// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/feature_sequence.hpp"
#include "trialsense/wav.hpp"

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace trialsense {

struct MfccConfig {
  double frame_length_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t n_fft = 512;
  std::size_t n_mels = 26;
  std::size_t n_coeffs = 13;
  double pre_emphasis = 0.97;
  double log_floor = 1e-10;
  double f_min = 0.0;
  double f_max = 0.0;  // 0 selects sample_rate / 2

  std::size_t frame_length(int sample_rate) const;
  std::size_t hop_length(int sample_rate) const;
  double upper_frequency(int sample_rate) const;

  /// Throws ConfigError when the configuration is inconsistent for the rate.
  void validate(int sample_rate) const;
};

nlohmann::json to_json(const MfccConfig& cfg);
/// Missing keys keep their current values. Throws ConfigError on bad types.
void update_from_json(MfccConfig& cfg, const nlohmann::json& doc);

/// HTK mel scale: 2595 log10(1 + f / 700). Throws DomainError for f < 0.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters over FFT bins. Filter m rises linearly from bin
/// edges[m] to 1.0 at edges[m + 1] and falls back to zero at edges[m + 2].
/// Edge frequencies are equally spaced in mel and snapped to the nearest bin
/// (bin k sits at k * sample_rate / n_fft).
struct MelFilterbank {
  Eigen::MatrixXd weights;         // n_mels x (n_fft / 2 + 1)
  std::vector<std::size_t> edges;  // n_mels + 2 strictly increasing bins

  std::size_t n_mels() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t peak_bin(std::size_t m) const { return edges[m + 1]; }
};

/// Throws ConfigError when two edges collapse onto one bin (filter too narrow
/// for the FFT resolution).
MelFilterbank build_mel_filterbank(const MfccConfig& config, int sample_rate);

/// Number of full frames: 1 + floor((N - L) / hop). Throws SignalTooShort when N < L.
std::size_t frame_count(std::size_t n_samples, const MfccConfig& config, int sample_rate);

/// log(max(e_m, log_floor)) per frame, T x n_mels, where e_m is the
/// filterbank-weighted power spectrum of the pre-emphasized, Hamming-windowed frame.
Eigen::MatrixXd log_mel_energies(const AudioSignal& signal, const MfccConfig& config);

/// Orthonormal DCT-II of each log-energy row, first n_coeffs kept.
/// Output modality Audio, frame_rate = 1000 / hop_ms.
FeatureSequence extract_mfcc(const AudioSignal& signal, const MfccConfig& config = {});

/// CSV with header "t,c0,...,c{n-1}"; t is the frame index and values carry
/// 9 significant digits.
std::string format_mfcc_csv(const FeatureSequence& mfcc);
void write_mfcc_csv(const std::filesystem::path& path, const FeatureSequence& mfcc);

}  // namespace trialsense
