// SPDX-License-Identifier: Apache-2.0
#include "trialsense/dataset.hpp"

#include "trialsense/embeddings.hpp"
#include "trialsense/error.hpp"
#include "trialsense/landmarks.hpp"
#include "trialsense/rng.hpp"
#include "trialsense/text_io.hpp"
#include "trialsense/wav.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

namespace trialsense {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view label_name(Label label) {
  return label == Label::Deceptive ? "deceptive" : "truthful";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "truthful") return Label::Truthful;
  if (text == "deceptive") return Label::Deceptive;
  return std::nullopt;
}

const fs::path& SampleRecord::path_for(Modality m) const {
  switch (m) {
    case Modality::Visual: return landmarks_path;
    case Modality::Audio: return audio_path;
    case Modality::Text: return embedding_path;
  }
  return audio_path;
}

std::size_t DatasetManifest::n_deceptive() const {
  return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const SampleRecord& s) {
    return s.label == Label::Deceptive;
  }));
}

std::size_t DatasetManifest::n_truthful() const { return n_total() - n_deceptive(); }

namespace {

std::string required_string(const json& entry, const char* key, std::size_t index) {
  const auto it = entry.find(key);
  if (it == entry.end()) {
    throw MalformedManifest("sample " + std::to_string(index) + " lacks field '" + key + "'");
  }
  if (!it->is_string()) {
    throw MalformedManifest("sample " + std::to_string(index) + " field '" + key + "' is not a string");
  }
  return it->get<std::string>();
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path;
  return base_dir / path;
}

std::string relative_to(const fs::path& path, const fs::path& base_dir) {
  if (base_dir.empty()) return path.generic_string();
  const fs::path rel = path.lexically_relative(base_dir);
  if (rel.empty() || *rel.begin() == "..") return path.generic_string();
  return rel.generic_string();
}

}  // namespace

DatasetManifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw MalformedManifest(std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) throw MalformedManifest("top level must be an object");
  const auto samples = doc.find("samples");
  if (samples == doc.end() || !samples->is_array()) {
    throw MalformedManifest("missing 'samples' array");
  }

  DatasetManifest manifest;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < samples->size(); ++i) {
    const json& entry = (*samples)[i];
    if (!entry.is_object()) throw MalformedManifest("sample " + std::to_string(i) + " is not an object");
    SampleRecord record;
    record.id = required_string(entry, "id", i);
    if (record.id.empty()) throw MalformedManifest("sample " + std::to_string(i) + " has an empty id");
    if (!seen.insert(record.id).second) throw MalformedManifest("duplicate id '" + record.id + "'");
    record.audio_path = resolve(base_dir, required_string(entry, "audio", i));
    record.landmarks_path = resolve(base_dir, required_string(entry, "landmarks", i));
    record.embedding_path = resolve(base_dir, required_string(entry, "embedding", i));
    const std::string label = required_string(entry, "label", i);
    const auto parsed = parse_label(label);
    if (!parsed) throw MalformedManifest("sample '" + record.id + "' has unknown label '" + label + "'");
    record.label = *parsed;
    manifest.samples.push_back(std::move(record));
  }
  return manifest;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw MalformedManifest(e.what());
  }
  return parse_manifest(text, path.parent_path());
}

std::string serialize_manifest(const DatasetManifest& manifest, const fs::path& base_dir) {
  json samples = json::array();
  for (const SampleRecord& s : manifest.samples) {
    samples.push_back({{"id", s.id},
                       {"audio", relative_to(s.audio_path, base_dir)},
                       {"landmarks", relative_to(s.landmarks_path, base_dir)},
                       {"embedding", relative_to(s.embedding_path, base_dir)},
                       {"label", std::string(label_name(s.label))}});
  }
  return json{{"samples", samples}}.dump(2) + "\n";
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  }
}

DatasetSplit split_dataset(const DatasetManifest& manifest, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = manifest.n_total();
  if (n < 2) throw TooFewSamples("need at least 2 samples, have " + std::to_string(n));

  // Class 0 = deceptive so it wins remainder ties.
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < n; ++i) {
    members[manifest.samples[i].label == Label::Deceptive ? 0 : 1].push_back(i);
  }
  for (const auto& m : members) {
    if (m.empty()) throw TooFewSamples("a label class is empty; stratified split impossible");
  }

  const auto n_train_total = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n) + 0.5));
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double exact = spec.train_fraction * static_cast<double>(members[c].size());
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  // At most one leftover slot per class: round(f n) - sum floor(f n_c) is 0, 1 or 2.
  std::array<std::size_t, 2> order = {0, 1};
  if (remainder[1] > remainder[0]) order = {1, 0};
  for (std::size_t c : order) {
    if (assigned < n_train_total && quota[c] < members[c].size()) {
      ++quota[c];
      ++assigned;
    }
  }

  std::vector<bool> in_train(n, false);
  for (std::size_t c = 0; c < 2; ++c) {
    Rng rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (c + 1)));
    std::vector<std::size_t> shuffled = members[c];
    rng.shuffle(std::span<std::size_t>(shuffled));
    for (std::size_t k = 0; k < quota[c]; ++k) in_train[shuffled[k]] = true;
  }

  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? split.train : split.test).push_back(manifest.samples[i]);
  }
  return split;
}

bool ValidationResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ModalityCheck& c) { return c.ok; });
}

namespace {

std::string check_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return "missing file " + path.string();
  if (!fs::is_regular_file(path, ec)) return "not a regular file: " + path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) return "unreadable file " + path.string();
  return {};
}

ModalityCheck run_check(Modality m, const fs::path& path) {
  ModalityCheck check{m, false, check_file(path)};
  if (!check.reason.empty()) return check;
  try {
    switch (m) {
      case Modality::Audio: {
        const std::string raw = read_file(path);
        const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
        require_canonical(read_wav_header(bytes));
        break;
      }
      case Modality::Visual: check_landmarks_header(path); break;
      case Modality::Text: check_embedding_header(path); break;
    }
    check.ok = true;
  } catch (const std::exception& e) {
    check.reason = e.what();
  }
  return check;
}

}  // namespace

ValidationResult validate_sample(const SampleRecord& record) {
  ValidationResult result;
  result.sample_id = record.id;
  for (Modality m : kAllModalities) result.checks.push_back(run_check(m, record.path_for(m)));
  return result;
}

}  // namespace trialsense
