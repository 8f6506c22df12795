// SPDX-License-Identifier: Apache-2.0
#include "trialsense/synthetic.hpp"

#include "trialsense/error.hpp"
#include "trialsense/rng.hpp"
#include "trialsense/text_io.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace trialsense {

void SyntheticOptions::validate() const {
  if (samples < 2) throw ConfigError("synthetic set needs at least 2 samples");
  if (!(audio_seconds > 0.0)) throw ConfigError("audio_seconds must be positive");
  if (landmark_frames < 1) throw ConfigError("landmark_frames must be >= 1");
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  if (text_tokens < 1 || text_dim < 1) throw ConfigError("text_tokens and text_dim must be >= 1");
  if (text_signal_dims < 1 || text_signal_dims > text_dim) throw ConfigError("text_signal_dims out of range");
}

namespace {

constexpr double kPi = std::numbers::pi;

// Frontal face with eye centers at (-0.5, 0) and (0.5, 0), y pointing down.
LandmarkFrame face_template() {
  LandmarkFrame f;
  auto& p = f.points;
  for (int i = 0; i <= 16; ++i) {
    const double th = kPi * i / 16.0;
    p[i] = {-1.05 * std::cos(th), 0.1 + 1.25 * std::sin(th)};
  }
  for (int k = 0; k < 5; ++k) {
    const double x = 0.2 + 0.7 * (4 - k) / 4.0;
    const double y = -0.35 - 0.1 * std::sin(kPi * k / 4.0);
    p[17 + k] = {-x, y};
    p[26 - k] = {x, y};
  }
  for (int k = 0; k < 4; ++k) p[27 + k] = {0.0, -0.1 + 0.15 * k};
  for (int k = 0; k < 5; ++k) p[31 + k] = {-0.2 + 0.1 * k, 0.55};
  for (int side = 0; side < 2; ++side) {
    const double cx = side == 0 ? -0.5 : 0.5;
    for (int k = 0; k < 6; ++k) {
      const double th = kPi - 2.0 * kPi * k / 6.0;
      p[36 + 6 * side + k] = {cx + 0.18 * std::cos(th), -0.07 * std::sin(th)};
    }
  }
  for (int k = 0; k < 12; ++k) {
    const double th = kPi - 2.0 * kPi * k / 12.0;
    p[48 + k] = {0.4 * std::cos(th), 0.85 - 0.15 * std::sin(th)};
  }
  for (int k = 0; k < 8; ++k) {
    const double th = kPi - 2.0 * kPi * k / 8.0;
    p[60 + k] = {0.25 * std::cos(th), 0.85 - 0.06 * std::sin(th)};
  }
  return f;
}

bool is_lower_lip(std::size_t i) { return (i >= 55 && i <= 59) || (i >= 65 && i <= 67); }
bool is_chin(std::size_t i) { return i >= 6 && i <= 10; }
bool is_brow(std::size_t i) { return i >= 17 && i <= 26; }

LandmarkSequence synth_landmarks(double s_v, const SyntheticOptions& o, Rng& rng) {
  LandmarkFrame shape = face_template();
  for (auto& pt : shape.points) {
    pt.x += rng.normal(0.0, 0.02);
    pt.y += rng.normal(0.0, 0.02);
  }
  const double scale = rng.uniform(60.0, 120.0);
  const double tx = rng.uniform(200.0, 400.0);
  const double ty = rng.uniform(150.0, 300.0);
  const double talk_rate = rng.uniform(2.0, 5.0);
  const double talk_phase = rng.uniform(0.0, 2.0 * kPi);

  LandmarkSequence seq;
  seq.fps = o.fps;
  seq.frames.resize(o.landmark_frames);
  for (std::size_t t = 0; t < o.landmark_frames; ++t) {
    const double time = static_cast<double>(t) / o.fps;
    const double open = o.lip_shift * s_v + 0.01 * std::abs(std::sin(2.0 * kPi * talk_rate * time + talk_phase));
    const double drift_x = 0.05 * std::sin(0.7 * time + talk_phase);
    const double drift_y = 0.03 * std::cos(0.5 * time + talk_phase);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      Point2 pt = shape.points[i];
      if (is_lower_lip(i)) pt.y += open;
      if (is_chin(i)) pt.y += 0.5 * open;
      if (is_brow(i)) pt.y -= 0.5 * open;
      pt.x += drift_x + rng.normal(0.0, 0.01);
      pt.y += drift_y + rng.normal(0.0, 0.01);
      seq.frames[t].points[i] = {tx + scale * pt.x, ty + scale * pt.y};
    }
  }
  return seq;
}

AudioSignal synth_audio(double s_a, const SyntheticOptions& o, Rng& rng) {
  AudioSignal a;
  const auto n = static_cast<std::size_t>(std::lround(o.audio_seconds * a.sample_rate));
  a.samples.resize(n);
  const double amplitude = o.base_amplitude * std::exp(0.5 * s_a);
  // Brighter voice (stronger upper harmonics) for higher scores.
  const double h2 = 0.5 * std::exp(0.5 * s_a);
  const double h3 = 0.25 * std::exp(s_a);
  const double norm = 1.0 / (1.0 + h2 + h3);
  const double f0 = rng.uniform(140.0, 220.0);
  const double phase = rng.uniform(0.0, 2.0 * kPi);
  const double sr = a.sample_rate;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 2.0 * kPi * f0 * static_cast<double>(k) / sr + phase;
    const double voiced = norm * (std::sin(w) + h2 * std::sin(2.0 * w) + h3 * std::sin(3.0 * w)) + 0.3 * rng.normal();
    a.samples[k] = amplitude * voiced + 0.002 * rng.normal();
  }
  return a;
}

EmbeddingMatrix synth_text(double s_t, const SyntheticOptions& o, Rng& rng) {
  EmbeddingMatrix m;
  const auto tokens = static_cast<Eigen::Index>(o.text_tokens);
  const auto dim = static_cast<Eigen::Index>(o.text_dim);
  m.values.resize(tokens, dim);
  for (Eigen::Index r = 0; r < tokens; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const bool signal = c < static_cast<Eigen::Index>(o.text_signal_dims);
      m.values(r, c) = signal ? o.text_shift * s_t + rng.normal(0.0, o.text_token_noise) : rng.normal();
    }
  }
  return m;
}

std::string sample_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "syn_%03zu", i);
  return buf;
}

}  // namespace

std::vector<SyntheticSample> generate_synthetic(const SyntheticOptions& options) {
  options.validate();
  Rng rng(options.seed);
  const std::size_t want_deceptive = (options.samples + 1) / 2;
  const std::size_t want_truthful = options.samples / 2;
  std::size_t n_deceptive = 0;
  std::size_t n_truthful = 0;

  std::vector<SyntheticSample> out;
  out.reserve(options.samples);
  while (out.size() < options.samples) {
    std::array<double, 3> s{rng.normal(), rng.normal(), rng.normal()};
    const Label label = s[0] + s[1] + s[2] > 0.0 ? Label::Deceptive : Label::Truthful;
    if (label == Label::Deceptive ? n_deceptive == want_deceptive : n_truthful == want_truthful) continue;
    (label == Label::Deceptive ? n_deceptive : n_truthful)++;

    SyntheticSample sample;
    sample.id = sample_id(out.size());
    sample.label = label;
    sample.latent = s;
    sample.landmarks = synth_landmarks(s[0], options, rng);
    sample.audio = synth_audio(s[1], options, rng);
    sample.text = synth_text(s[2], options, rng);
    out.push_back(std::move(sample));
  }
  return out;
}

DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir,
                                        const std::vector<SyntheticSample>& samples) {
  std::filesystem::create_directories(dir);
  DatasetManifest manifest;
  for (const auto& s : samples) {
    SampleRecord rec;
    rec.id = s.id;
    rec.label = s.label;
    rec.audio_path = dir / (s.id + ".wav");
    rec.landmarks_path = dir / (s.id + ".landmarks.csv");
    rec.embedding_path = dir / (s.id + ".emb.txt");
    write_wav(rec.audio_path, s.audio);
    write_landmarks(rec.landmarks_path, s.landmarks);
    write_embeddings(rec.embedding_path, s.text);
    manifest.samples.push_back(std::move(rec));
  }
  const auto manifest_path = dir / "manifest.json";
  write_file(manifest_path, serialize_manifest(manifest, dir));
  return load_manifest(manifest_path);
}

SampleFeatures featurize(const SyntheticSample& sample, const MfccConfig& mfcc) {
  SampleFeatures f;
  f.id = sample.id;
  f.label = sample.label;
  f.sequences.emplace(Modality::Visual, landmarks_to_features(sample.landmarks));
  f.sequences.emplace(Modality::Audio, extract_mfcc(sample.audio, mfcc));
  f.sequences.emplace(Modality::Text, embeddings_to_features(sample.text));
  return f;
}

std::vector<SampleFeatures> make_separable_set(std::size_t n, std::size_t steps, Eigen::Index dim,
                                               double noise, std::uint64_t seed) {
  if (n < 2 || steps < 1 || dim < 1) throw ConfigError("separable set needs n >= 2, steps >= 1, dim >= 1");
  Rng rng(seed);
  std::vector<SampleFeatures> out;
  for (std::size_t i = 0; i < n; ++i) {
    SampleFeatures s;
    s.id = "sep_" + std::to_string(i);
    s.label = i % 2 == 0 ? Label::Deceptive : Label::Truthful;
    const double y = s.label == Label::Deceptive ? 1.0 : 0.0;
    FeatureSequence seq{Modality::Audio, Eigen::MatrixXd(static_cast<Eigen::Index>(steps), dim), 100.0};
    for (Eigen::Index t = 0; t < seq.frames.rows(); ++t) {
      seq.frames(t, 0) = y + rng.normal(0.0, noise);
      for (Eigen::Index c = 1; c < dim; ++c) seq.frames(t, c) = rng.normal();
    }
    s.sequences.emplace(Modality::Audio, std::move(seq));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace trialsense
