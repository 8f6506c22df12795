// SPDX-License-Identifier: Apache-2.0
#include "trialsense/grid.hpp"

#include "trialsense/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <thread>

namespace trialsense {

const GridCell* GridReport::find(ModelKind kind, ModalityCombo combo) const {
  for (const auto& c : cells) {
    if (c.kind == kind && c.combo == combo) return &c;
  }
  return nullptr;
}

std::vector<const GridCell*> GridReport::failed() const {
  std::vector<const GridCell*> out;
  for (const auto& c : cells) {
    if (!c.metrics) out.push_back(&c);
  }
  return out;
}

namespace {

struct LoadedSample {
  SampleFeatures features;
  std::map<Modality, std::string> errors;
};

LoadedSample load_all(const SampleRecord& rec, ModalityCombo needed, const MfccConfig& mfcc) {
  LoadedSample out;
  out.features.id = rec.id;
  out.features.label = rec.label;
  for (Modality m : needed.modalities()) {
    try {
      auto one = load_sample_features(rec, ModalityCombo{m}, mfcc);
      out.features.sequences.emplace(m, std::move(one.sequences.at(m)));
    } catch (const Error& e) {
      out.errors.emplace(m, rec.id + ": " + e.what());
    }
  }
  return out;
}

std::vector<SampleFeatures> gather(const std::vector<SampleRecord>& records,
                                   const std::map<std::string, const LoadedSample*>& by_id,
                                   ModalityCombo combo) {
  std::vector<SampleFeatures> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const LoadedSample& s = *by_id.at(r.id);
    for (Modality m : combo.modalities()) {
      const auto it = s.errors.find(m);
      if (it != s.errors.end()) throw MissingModality(it->second);
    }
    out.push_back(s.features);
  }
  return out;
}

}  // namespace

GridReport run_grid(const DatasetManifest& manifest, const std::vector<ModelKind>& kinds,
                    const std::vector<ModalityCombo>& combos, const GridOptions& options) {
  if (kinds.empty()) throw ConfigError("grid needs at least one model kind");
  if (combos.empty()) throw ConfigError("grid needs at least one modality combination");
  options.train.validate();
  if (options.hidden < 1) throw ConfigError("hidden size must be positive");

  const SplitSpec split_spec{options.train_fraction, options.train.seed};
  const DatasetSplit split = split_dataset(manifest, split_spec);

  std::vector<Modality> needed_list;
  for (Modality m : kAllModalities) {
    if (std::any_of(combos.begin(), combos.end(), [m](ModalityCombo c) { return c.contains(m); })) {
      needed_list.push_back(m);
    }
  }
  const ModalityCombo needed(needed_list);

  std::vector<LoadedSample> loaded;
  loaded.reserve(manifest.samples.size());
  for (const auto& rec : manifest.samples) loaded.push_back(load_all(rec, needed, options.mfcc));
  std::map<std::string, const LoadedSample*> by_id;
  for (const auto& s : loaded) by_id.emplace(s.features.id, &s);

  GridReport report;
  for (const auto& r : split.train) report.train_ids.push_back(r.id);
  for (const auto& r : split.test) report.test_ids.push_back(r.id);
  nlohmann::json kinds_doc = nlohmann::json::array();
  for (ModelKind k : kinds) kinds_doc.push_back(model_kind_name(k));
  nlohmann::json combos_doc = nlohmann::json::array();
  for (ModalityCombo c : combos) combos_doc.push_back(c.token());
  report.config = {{"train", to_json(options.train)},
                   {"model", {{"hidden", options.hidden}, {"init_seed", options.train.seed}}},
                   {"split", {{"train_fraction", options.train_fraction}, {"seed", split_spec.seed}}},
                   {"mfcc", to_json(options.mfcc)},
                   {"kinds", kinds_doc},
                   {"combos", combos_doc}};

  for (ModelKind k : kinds) {
    for (ModalityCombo c : combos) {
      GridCell cell;
      cell.kind = k;
      cell.combo = c;
      report.cells.push_back(std::move(cell));
    }
  }

  auto run_cell = [&](GridCell& cell) {
    try {
      const auto train_set = gather(split.train, by_id, cell.combo);
      const auto test_set = gather(split.test, by_id, cell.combo);
      ModelSpec spec{cell.kind, options.hidden, options.train.seed};
      TrainResult trained = train(spec, cell.combo, train_set, options.train);
      cell.metrics = evaluate(trained.checkpoint, test_set).metrics;
      cell.history = std::move(trained.history);
    } catch (const Error& e) {
      cell.metrics.reset();
      cell.error = e.what();
    }
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, report.cells.size());
  if (jobs == 1) {
    for (auto& cell : report.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < report.cells.size(); i = next++) run_cell(report.cells[i]);
      });
    }
  }
  return report;
}

namespace {

std::string percent(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * accuracy);
  return buf;
}

struct Section {
  const char* title;
  const char* key;
  std::vector<const char*> combos;
};

const std::vector<Section>& sections() {
  static const std::vector<Section> s{{"Single modality", "singles", {"v", "t", "a"}},
                                      {"Pairs of modalities", "pairs", {"a,t", "v,t", "v,a"}},
                                      {"All modalities", "triple", {"v,a,t"}}};
  return s;
}

std::vector<ModelKind> report_kinds(const GridReport& report) {
  std::vector<ModelKind> kinds;
  for (const auto& c : report.cells) {
    if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) kinds.push_back(c.kind);
  }
  return kinds;
}

}  // namespace

nlohmann::json grid_report_to_json(const GridReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  nlohmann::json failed = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json cell = {{"model", model_kind_name(c.kind)}, {"combo", c.combo.label()}};
    if (c.metrics) {
      const Metrics& m = *c.metrics;
      cell["status"] = "ok";
      cell["accuracy"] = m.accuracy();
      cell["n"] = m.n();
      cell["confusion"] = {{"tp", m.true_positive}, {"fp", m.false_positive},
                           {"fn", m.false_negative}, {"tn", m.true_negative}};
      nlohmann::json history = nlohmann::json::array();
      for (const auto& e : c.history) {
        history.push_back({{"epoch", e.epoch}, {"loss", e.mean_loss}, {"train_accuracy", e.train_accuracy}});
      }
      cell["history"] = std::move(history);
    } else {
      cell["status"] = "failed";
      cell["error"] = c.error;
      failed.push_back({{"model", model_kind_name(c.kind)}, {"combo", c.combo.label()}, {"error", c.error}});
    }
    cells.push_back(std::move(cell));
  }

  nlohmann::json tables = nlohmann::json::object();
  for (const auto& sec : sections()) {
    nlohmann::json rows = nlohmann::json::object();
    for (ModelKind k : report_kinds(report)) {
      nlohmann::json row = nlohmann::json::object();
      for (const char* token : sec.combos) {
        const ModalityCombo combo = ModalityCombo::parse(token);
        const GridCell* cell = report.find(k, combo);
        if (cell == nullptr) continue;
        row[combo.label()] = cell->metrics ? nlohmann::json(percent(cell->metrics->accuracy())) : nlohmann::json();
      }
      if (!row.empty()) rows[std::string(model_kind_label(k))] = std::move(row);
    }
    tables[sec.key] = std::move(rows);
  }

  return {{"format", "trialsense-grid"},
          {"version", 1},
          {"config", report.config},
          {"split",
           {{"n_train", report.train_ids.size()},
            {"n_test", report.test_ids.size()},
            {"train_ids", report.train_ids},
            {"test_ids", report.test_ids}}},
          {"cells", cells},
          {"failed_cells", failed},
          {"tables", tables}};
}

std::string render_grid_table(const GridReport& report) {
  const auto kinds = report_kinds(report);
  std::string out;
  char buf[64];
  for (const auto& sec : sections()) {
    out += sec.title;
    out += '\n';
    std::snprintf(buf, sizeof buf, "%-10s", "Model");
    out += buf;
    for (const char* token : sec.combos) {
      std::snprintf(buf, sizeof buf, " %9s", ModalityCombo::parse(token).label().c_str());
      out += buf;
    }
    out += '\n';
    for (ModelKind k : kinds) {
      std::snprintf(buf, sizeof buf, "%-10s", std::string(model_kind_label(k)).c_str());
      out += buf;
      for (const char* token : sec.combos) {
        const GridCell* cell = report.find(k, ModalityCombo::parse(token));
        std::string value = "-";
        if (cell != nullptr) value = cell->metrics ? percent(cell->metrics->accuracy()) + "%" : "ERR";
        std::snprintf(buf, sizeof buf, " %9s", value.c_str());
        out += buf;
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

}  // namespace trialsense
