// SPDX-License-Identifier: Apache-2.0
#include "trialsense/fusion.hpp"

#include "trialsense/error.hpp"
#include "trialsense/text_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace trialsense {

using nlohmann::json;

ModalityCombo::ModalityCombo(std::initializer_list<Modality> modalities)
    : ModalityCombo(std::span<const Modality>(modalities.begin(), modalities.size())) {}

ModalityCombo::ModalityCombo(std::span<const Modality> modalities) {
  for (Modality m : modalities) bits_ |= bit(m);
  if (bits_ == 0) throw ConfigError("modality combination must not be empty");
}

ModalityCombo ModalityCombo::parse(std::string_view text) {
  ModalityCombo combo;
  for (std::string_view token : split(text, ',')) {
    token = trim(token);
    const auto m = parse_modality(token);
    if (!m) throw ConfigError("unknown modality token '" + std::string(token) + "'");
    if (combo.bits_ & bit(*m)) throw ConfigError("modality '" + std::string(token) + "' repeated");
    combo.bits_ |= bit(*m);
  }
  if (combo.bits_ == 0) throw ConfigError("modality combination must not be empty");
  return combo;
}

std::vector<ModalityCombo> ModalityCombo::all() {
  using M = Modality;
  return {ModalityCombo{M::Visual},
          ModalityCombo{M::Text},
          ModalityCombo{M::Audio},
          ModalityCombo{M::Audio, M::Text},
          ModalityCombo{M::Visual, M::Text},
          ModalityCombo{M::Visual, M::Audio},
          ModalityCombo{M::Visual, M::Audio, M::Text}};
}

std::size_t ModalityCombo::size() const {
  std::size_t n = 0;
  for (Modality m : kAllModalities) n += contains(m) ? 1 : 0;
  return n;
}

std::vector<Modality> ModalityCombo::modalities() const {
  std::vector<Modality> out;
  for (Modality m : kAllModalities) {
    if (contains(m)) out.push_back(m);
  }
  return out;
}

std::string ModalityCombo::label() const {
  // Pairs follow the report's A+T / V+T / V+A spelling, which is canonical order.
  std::string out;
  for (Modality m : modalities()) {
    if (!out.empty()) out += '+';
    out += modality_letter(m);
  }
  return out;
}

std::string ModalityCombo::token() const {
  std::string out;
  for (Modality m : modalities()) {
    if (!out.empty()) out += ',';
    out += static_cast<char>(modality_letter(m) - 'A' + 'a');
  }
  return out;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

json norm_stats_to_json(const NormStats& stats) {
  json doc = json::object();
  for (const auto& [m, s] : stats.per_modality) {
    doc[std::string(modality_name(m))] = {{"mean", vector_to_json(s.mean)}, {"std", vector_to_json(s.std)}};
  }
  return doc;
}

NormStats norm_stats_from_json(const json& doc) {
  NormStats stats;
  try {
    if (!doc.is_object()) throw MalformedCheckpoint("norm stats must be an object");
    for (const auto& [key, value] : doc.items()) {
      const auto m = parse_modality(key);
      if (!m) throw MalformedCheckpoint("unknown modality '" + key + "' in norm stats");
      ModalityStats s{vector_from_json(value.at("mean")), vector_from_json(value.at("std"))};
      if (s.mean.size() != s.std.size()) throw MalformedCheckpoint("mean/std length mismatch for " + key);
      if ((s.std.array() < 0.0).any()) throw MalformedCheckpoint("negative std for " + key);
      stats.per_modality[*m] = std::move(s);
    }
  } catch (const json::exception& e) {
    throw MalformedCheckpoint(std::string("norm stats: ") + e.what());
  }
  return stats;
}

void write_norm_stats(const std::filesystem::path& path, const NormStats& stats) {
  write_file(path, norm_stats_to_json(stats).dump(2) + "\n");
}

NormStats read_norm_stats(const std::filesystem::path& path) {
  try {
    return norm_stats_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw MalformedCheckpoint(std::string("norm stats: ") + e.what());
  } catch (const MalformedCheckpoint&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw MalformedCheckpoint(e.what());
  }
}

FeatureSequence resample_sequence(const FeatureSequence& seq, std::size_t target_len) {
  if (target_len == 0) throw ConfigError("target length must be at least 1");
  seq.validate();
  const Eigen::Index t_in = seq.length();
  const auto t_out = static_cast<Eigen::Index>(target_len);

  FeatureSequence out;
  out.modality = seq.modality;
  out.frame_rate = seq.frame_rate;
  if (t_out == t_in) {
    out.frames = seq.frames;
    return out;
  }
  out.frames.resize(t_out, seq.dim());
  if (t_out == 1) {
    out.frames = seq.frames.colwise().mean();
    return out;
  }
  if (t_in == 1) {
    out.frames = seq.frames.replicate(t_out, 1);
    return out;
  }
  for (Eigen::Index j = 0; j < t_out; ++j) {
    // Integer numerator keeps the endpoints exact.
    const double pos = static_cast<double>(j * (t_in - 1)) / static_cast<double>(t_out - 1);
    auto lo = static_cast<Eigen::Index>(std::floor(pos));
    if (lo >= t_in - 1) lo = t_in - 1;
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) {
      out.frames.row(j) = seq.frames.row(lo);
    } else {
      const auto a = seq.frames.row(lo).array();
      const auto b = seq.frames.row(lo + 1).array();
      // a + f (b - a) is exact for constant runs; the clamp absorbs rounding past the endpoints.
      out.frames.row(j) = (a + frac * (b - a)).max(a.min(b)).min(a.max(b)).matrix();
    }
  }
  return out;
}

FusedInput fuse(std::span<const FeatureSequence> seqs, ModalityCombo combo, std::size_t target_len,
                const NormStats& stats) {
  std::map<Modality, const FeatureSequence*> by_modality;
  for (const FeatureSequence& s : seqs) {
    if (!by_modality.emplace(s.modality, &s).second) {
      throw DuplicateModality(std::string(modality_name(s.modality)) + " supplied twice");
    }
  }
  std::vector<FeatureSequence> blocks;
  Eigen::Index width = 0;
  for (Modality m : combo.modalities()) {
    const auto it = by_modality.find(m);
    if (it == by_modality.end()) throw MissingModality(std::string(modality_name(m)) + " not supplied");
    FeatureSequence block = resample_sequence(*it->second, target_len);
    if (const auto st = stats.per_modality.find(m); st != stats.per_modality.end()) {
      const ModalityStats& s = st->second;
      if (s.mean.size() != block.dim() || s.std.size() != block.dim()) {
        throw ShapeMismatch(std::string(modality_name(m)) + " stats have width " +
                            std::to_string(s.mean.size()) + ", features have " + std::to_string(block.dim()));
      }
      const Eigen::RowVectorXd inv = (s.std.array() + kNormEpsilon).inverse().matrix().transpose();
      block.frames = ((block.frames.rowwise() - s.mean.transpose()).array().rowwise() * inv.array()).matrix();
    }
    width += block.dim();
    blocks.push_back(std::move(block));
  }
  FusedInput fused{Eigen::MatrixXd(static_cast<Eigen::Index>(target_len), width), combo};
  Eigen::Index col = 0;
  for (const FeatureSequence& b : blocks) {
    fused.frames.middleCols(col, b.dim()) = b.frames;
    col += b.dim();
  }
  return fused;
}

}  // namespace trialsense
