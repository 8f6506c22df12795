// SPDX-License-Identifier: Apache-2.0
#include "trialsense/run_config.hpp"

#include "trialsense/error.hpp"
#include "trialsense/json_util.hpp"
#include "trialsense/text_io.hpp"
#include "trialsense/wav.hpp"

namespace trialsense {

void RunConfig::validate() const {
  train.validate();
  mfcc.validate(kCanonicalSampleRate);
  if (hidden < 1) throw ConfigError("model.hidden must be positive");
  SplitSpec{train_fraction, train.seed}.validate();
}

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"train", to_json(cfg.train)},
          {"mfcc", to_json(cfg.mfcc)},
          {"model", {{"hidden", cfg.hidden}}},
          {"split", {{"train_fraction", cfg.train_fraction}, {"seed", cfg.train.seed}}}};
}

void update_from_json(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "train") {
      update_from_json(cfg.train, value);
    } else if (key == "mfcc") {
      update_from_json(cfg.mfcc, value);
    } else if (key == "model") {
      if (!value.is_object()) throw ConfigError("model must be an object");
      if (const auto it = value.find("hidden"); it != value.end()) {
        if (!is_count(*it)) throw ConfigError("model.hidden must be a positive integer");
        cfg.hidden = it->get<Eigen::Index>();
      }
    } else if (key == "split") {
      if (!value.is_object()) throw ConfigError("split must be an object");
      if (const auto it = value.find("train_fraction"); it != value.end()) {
        if (!it->is_number()) throw ConfigError("split.train_fraction must be a number");
        cfg.train_fraction = it->get<double>();
      }
      if (const auto it = value.find("seed"); it != value.end()) {
        if (!is_count(*it)) throw ConfigError("split.seed must be a non-negative integer");
        cfg.train.seed = it->get<std::uint64_t>();
      }
    } else {
      throw ConfigError("unknown config section '" + key + "'");
    }
  }
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  update_from_json(base, doc);
  return base;
}

}  // namespace trialsense
