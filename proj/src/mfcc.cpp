// SPDX-License-Identifier: Apache-2.0
#include "trialsense/mfcc.hpp"

#include "trialsense/dsp.hpp"
#include "trialsense/error.hpp"
#include "trialsense/json_util.hpp"
#include "trialsense/text_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace trialsense {

std::size_t MfccConfig::frame_length(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_length_ms * sample_rate / 1000.0));
}

std::size_t MfccConfig::hop_length(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0));
}

double MfccConfig::upper_frequency(int sample_rate) const {
  return f_max > 0.0 ? f_max : sample_rate / 2.0;
}

void MfccConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  if (frame_length(sample_rate) == 0) throw ConfigError("frame length rounds to zero samples");
  if (hop_length(sample_rate) == 0) throw ConfigError("hop rounds to zero samples");
  if (!is_power_of_two(n_fft)) throw ConfigError("n_fft must be a power of two");
  if (n_fft < frame_length(sample_rate)) throw ConfigError("n_fft shorter than the frame");
  if (n_mels == 0) throw ConfigError("n_mels must be positive");
  if (n_coeffs == 0 || n_coeffs > n_mels) throw ConfigError("need 1 <= n_coeffs <= n_mels");
  const double top = upper_frequency(sample_rate);
  if (f_min < 0.0 || f_min >= top || top > sample_rate / 2.0) {
    throw ConfigError("need 0 <= f_min < f_max <= sample_rate / 2");
  }
  if (!(log_floor > 0.0)) throw ConfigError("log_floor must be positive");
}

double hz_to_mel(double hz) {
  if (!(hz >= 0.0)) throw DomainError("negative frequency " + format_real(hz));
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (!(mel >= 0.0)) throw DomainError("negative mel value " + format_real(mel));
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank build_mel_filterbank(const MfccConfig& config, int sample_rate) {
  config.validate(sample_rate);
  const std::size_t n_bins = config.n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(config.f_min);
  const double mel_hi = hz_to_mel(config.upper_frequency(sample_rate));
  const std::size_t n_edges = config.n_mels + 2;

  MelFilterbank bank;
  bank.edges.resize(n_edges);
  for (std::size_t e = 0; e < n_edges; ++e) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(e) /
                                    static_cast<double>(n_edges - 1);
    const double hz = mel_to_hz(mel);
    const double bin = hz * static_cast<double>(config.n_fft) / sample_rate;
    bank.edges[e] = std::min(static_cast<std::size_t>(std::lround(bin)), n_bins - 1);
  }
  for (std::size_t e = 1; e < n_edges; ++e) {
    if (bank.edges[e] <= bank.edges[e - 1]) {
      throw ConfigError("mel edges " + std::to_string(e - 1) + " and " + std::to_string(e) +
                        " share bin " + std::to_string(bank.edges[e]) +
                        ": too many filters for n_fft=" + std::to_string(config.n_fft));
    }
  }

  bank.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.n_mels),
                                       static_cast<Eigen::Index>(n_bins));
  for (std::size_t m = 0; m < config.n_mels; ++m) {
    const auto left = static_cast<double>(bank.edges[m]);
    const auto center = static_cast<double>(bank.edges[m + 1]);
    const auto right = static_cast<double>(bank.edges[m + 2]);
    for (std::size_t k = bank.edges[m]; k <= bank.edges[m + 2]; ++k) {
      const auto kd = static_cast<double>(k);
      const double w = kd <= center ? (kd - left) / (center - left) : (right - kd) / (right - center);
      bank.weights(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = w;
    }
  }
  return bank;
}

std::size_t frame_count(std::size_t n_samples, const MfccConfig& config, int sample_rate) {
  const std::size_t length = config.frame_length(sample_rate);
  if (n_samples < length) {
    throw SignalTooShort(std::to_string(n_samples) + " samples, need at least " +
                         std::to_string(length));
  }
  return 1 + (n_samples - length) / config.hop_length(sample_rate);
}

Eigen::MatrixXd log_mel_energies(const AudioSignal& signal, const MfccConfig& config) {
  config.validate(signal.sample_rate);
  const int rate = signal.sample_rate;
  const std::size_t length = config.frame_length(rate);
  const std::size_t hop = config.hop_length(rate);
  const std::size_t n_frames = frame_count(signal.samples.size(), config, rate);
  const MelFilterbank bank = build_mel_filterbank(config, rate);

  const auto& x = signal.samples;
  std::vector<double> emphasized(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    emphasized[n] = n == 0 ? x[0] : x[n] - config.pre_emphasis * x[n - 1];
  }

  std::vector<double> window(length);
  for (std::size_t n = 0; n < length; ++n) {
    window[n] = length == 1 ? 1.0
                            : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                                     static_cast<double>(length - 1));
  }

  const Fft plan(config.n_fft);
  std::vector<std::complex<double>> scratch;
  std::vector<double> frame(length);
  Eigen::VectorXd power(static_cast<Eigen::Index>(config.n_fft / 2 + 1));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_frames), static_cast<Eigen::Index>(config.n_mels));

  for (std::size_t t = 0; t < n_frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t n = 0; n < length; ++n) frame[n] = emphasized[start + n] * window[n];
    power_spectrum(plan, frame, scratch, std::span<double>(power.data(), static_cast<std::size_t>(power.size())));
    const Eigen::VectorXd energies = bank.weights * power;
    for (Eigen::Index m = 0; m < energies.size(); ++m) {
      out(static_cast<Eigen::Index>(t), m) = std::log(std::max(energies(m), config.log_floor));
    }
  }
  return out;
}

FeatureSequence extract_mfcc(const AudioSignal& signal, const MfccConfig& config) {
  const Eigen::MatrixXd log_energies = log_mel_energies(signal, config);
  const Dct2 dct(config.n_mels);
  const auto n_coeffs = static_cast<Eigen::Index>(config.n_coeffs);

  FeatureSequence seq;
  seq.modality = Modality::Audio;
  seq.frame_rate = 1000.0 / config.hop_ms;
  // Row-wise DCT: C = E * B^T, keeping the leading coefficients.
  seq.frames = log_energies * dct.basis().topRows(n_coeffs).transpose();
  return seq;
}

std::string format_mfcc_csv(const FeatureSequence& mfcc) {
  std::string out = "t";
  for (Eigen::Index c = 0; c < mfcc.dim(); ++c) out += ",c" + std::to_string(c);
  out += '\n';
  for (Eigen::Index t = 0; t < mfcc.length(); ++t) {
    out += std::to_string(t);
    for (Eigen::Index c = 0; c < mfcc.dim(); ++c) {
      out += ',';
      out += format_real(mfcc.frames(t, c));
    }
    out += '\n';
  }
  return out;
}

void write_mfcc_csv(const std::filesystem::path& path, const FeatureSequence& mfcc) {
  write_file(path, format_mfcc_csv(mfcc));
}

nlohmann::json to_json(const MfccConfig& cfg) {
  return {{"frame_length_ms", cfg.frame_length_ms}, {"hop_ms", cfg.hop_ms},   {"n_fft", cfg.n_fft},
          {"n_mels", cfg.n_mels},                   {"n_coeffs", cfg.n_coeffs}, {"pre_emphasis", cfg.pre_emphasis},
          {"log_floor", cfg.log_floor},             {"f_min", cfg.f_min},     {"f_max", cfg.f_max}};
}

void update_from_json(MfccConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("mfcc config must be a JSON object");
  auto real = [&doc](const char* key, double& out) {
    if (const auto it = doc.find(key); it != doc.end()) {
      if (!it->is_number()) throw ConfigError(std::string("mfcc.") + key + " must be a number");
      out = it->get<double>();
    }
  };
  auto count = [&doc](const char* key, std::size_t& out) {
    if (const auto it = doc.find(key); it != doc.end()) {
      if (!is_count(*it)) throw ConfigError(std::string("mfcc.") + key + " must be a non-negative integer");
      out = it->get<std::size_t>();
    }
  };
  real("frame_length_ms", cfg.frame_length_ms);
  real("hop_ms", cfg.hop_ms);
  count("n_fft", cfg.n_fft);
  count("n_mels", cfg.n_mels);
  count("n_coeffs", cfg.n_coeffs);
  real("pre_emphasis", cfg.pre_emphasis);
  real("log_floor", cfg.log_floor);
  real("f_min", cfg.f_min);
  real("f_max", cfg.f_max);
}

}  // namespace trialsense
