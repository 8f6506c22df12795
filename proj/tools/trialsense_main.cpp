// SPDX-License-Identifier: Apache-2.0
// trialsense command-line tool.

#include "trialsense/dataset.hpp"
#include "trialsense/error.hpp"
#include "trialsense/gradcheck.hpp"
#include "trialsense/grid.hpp"
#include "trialsense/mfcc.hpp"
#include "trialsense/run_config.hpp"
#include "trialsense/synthetic.hpp"
#include "trialsense/text_io.hpp"
#include "trialsense/train.hpp"
#include "trialsense/version.hpp"
#include "trialsense/wav.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace trialsense;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Flags shared by the training subcommands; unset flags leave the config file
// (or the built-in default) in place.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> target_len;
  std::optional<Eigen::Index> hidden;
  std::optional<double> train_fraction;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config with train/mfcc/model/split sections")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Seed for the split, initialization and shuffling (default 0)");
    app.add_option("--epochs", epochs, "Training epochs (default 30)");
    app.add_option("--lr", learning_rate, "Adam learning rate (default 1e-4)");
    app.add_option("--batch-size", batch_size, "Mini-batch size (default 16)");
    app.add_option("--target-len", target_len, "Resampled sequence length (default 64)");
    app.add_option("--hidden", hidden, "Recurrent hidden size (default 128)");
    app.add_option("--train-fraction", train_fraction, "Training share of the split (default 0.8)");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) cfg.train.seed = *seed;
    if (epochs) cfg.train.epochs = *epochs;
    if (learning_rate) cfg.train.learning_rate = *learning_rate;
    if (batch_size) cfg.train.batch_size = *batch_size;
    if (target_len) cfg.train.target_len = *target_len;
    if (hidden) cfg.hidden = *hidden;
    if (train_fraction) cfg.train_fraction = *train_fraction;
    cfg.validate();
    return cfg;
  }
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Timestamps and run details live next to an output, never inside it.
void write_sidecar(const fs::path& output, const std::string& command, nlohmann::json extra = {}) {
  nlohmann::json meta = {{"tool", "trialsense"},
                         {"version", kVersionString},
                         {"command", command},
                         {"created_utc", utc_timestamp()}};
  if (extra.is_object()) meta.update(extra);
  write_file(output.string() + ".meta.json", meta.dump(2) + "\n");
}

std::vector<SampleFeatures> load_features(const std::vector<SampleRecord>& records, ModalityCombo combo,
                                          const MfccConfig& mfcc) {
  std::vector<SampleFeatures> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(load_sample_features(r, combo, mfcc));
  return out;
}

nlohmann::json metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy()},
          {"n", m.n()},
          {"confusion",
           {{"tp", m.true_positive}, {"fp", m.false_positive}, {"fn", m.false_negative}, {"tn", m.true_negative}}}};
}

void print_metrics(const Metrics& m) {
  std::printf("accuracy %.4f (n=%zu)\n", m.accuracy(), m.n());
  std::printf("confusion tp=%zu fp=%zu fn=%zu tn=%zu\n", m.true_positive, m.false_positive, m.false_negative,
              m.true_negative);
}

std::vector<ModelKind> parse_kinds(const std::string& text) {
  std::vector<ModelKind> kinds;
  for (std::string_view token : split(text, ',')) {
    token = trim(token);
    const auto kind = parse_model_kind(token);
    if (!kind) throw ConfigError("unknown model '" + std::string(token) + "'");
    kinds.push_back(*kind);
  }
  return kinds;
}

std::vector<ModalityCombo> parse_combos(const std::string& text) {
  if (text == "all") return ModalityCombo::all();
  std::vector<ModalityCombo> combos;
  for (std::string_view token : split(text, ';')) combos.push_back(ModalityCombo::parse(trim(token)));
  return combos;
}

// ---- subcommands ----

int cmd_validate(const std::string& manifest_path) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  std::size_t bad = 0;
  for (const auto& rec : manifest.samples) {
    const ValidationResult r = validate_sample(rec);
    for (const auto& check : r.checks) {
      if (check.ok) continue;
      std::printf("FAIL %s %s: %s\n", rec.id.c_str(), std::string(modality_name(check.modality)).c_str(),
                  check.reason.c_str());
    }
    if (!r.ok()) ++bad;
  }
  std::printf("%zu samples (%zu deceptive, %zu truthful), %zu invalid\n", manifest.n_total(),
              manifest.n_deceptive(), manifest.n_truthful(), bad);
  return bad == 0 ? kExitOk : kExitData;
}

int cmd_extract_audio(const std::string& wav_path, const std::string& out_path, const std::string& config_path,
                      const std::string& command) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  cfg.mfcc.validate(kCanonicalSampleRate);
  const FeatureSequence mfcc = extract_mfcc(read_wav(wav_path), cfg.mfcc);
  write_mfcc_csv(out_path, mfcc);
  write_sidecar(out_path, command, {{"input", wav_path}, {"mfcc", to_json(cfg.mfcc)}, {"frames", mfcc.length()}});
  std::printf("%lld frames x %lld coefficients -> %s\n", static_cast<long long>(mfcc.length()),
              static_cast<long long>(mfcc.dim()), out_path.c_str());
  return kExitOk;
}

int cmd_train(const std::string& manifest_path, const std::string& model, const std::string& combo_text,
              const std::string& out_path, const std::string& history_path, const ConfigFlags& flags,
              const std::string& command) {
  const auto kind = parse_model_kind(model);
  if (!kind) throw ConfigError("unknown model '" + model + "'");
  const ModalityCombo combo = ModalityCombo::parse(combo_text);
  const RunConfig cfg = flags.resolve();

  const DatasetManifest manifest = load_manifest(manifest_path);
  const DatasetSplit split = split_dataset(manifest, SplitSpec{cfg.train_fraction, cfg.train.seed});
  const auto train_set = load_features(split.train, combo, cfg.mfcc);

  std::fprintf(stderr, "training %s on %s: %zu train / %zu test samples\n",
               std::string(model_kind_label(*kind)).c_str(), combo.label().c_str(), split.train.size(),
               split.test.size());
  TrainResult result = train(ModelSpec{*kind, cfg.hidden, cfg.train.seed}, combo, train_set, cfg.train);
  for (const auto& e : result.history) {
    std::fprintf(stderr, "epoch %zu/%zu loss %.6f train_acc %.4f\n", e.epoch, cfg.train.epochs, e.mean_loss,
                 e.train_accuracy);
  }

  result.checkpoint.config = to_json(cfg);
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : result.history) {
    history.push_back({{"epoch", e.epoch}, {"loss", e.mean_loss}, {"train_accuracy", e.train_accuracy}});
  }
  result.checkpoint.config["history"] = history;
  write_checkpoint(out_path, result.checkpoint);
  write_sidecar(out_path, command);
  if (!history_path.empty()) {
    std::string csv = "epoch,loss,train_accuracy\n";
    for (const auto& e : result.history) {
      csv += std::to_string(e.epoch) + "," + format_real(e.mean_loss, 17) + "," + format_real(e.train_accuracy, 17) +
             "\n";
    }
    write_file(history_path, csv);
  }
  std::printf("wrote %s\n", out_path.c_str());
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& manifest_path, bool all_samples,
             const std::string& predictions_path, const std::string& out_path, const std::string& command) {
  const Checkpoint ckpt = read_checkpoint(ckpt_path);
  RunConfig cfg;
  if (ckpt.config.is_object()) {
    nlohmann::json doc = ckpt.config;
    doc.erase("history");
    update_from_json(cfg, doc);
  }
  const DatasetManifest manifest = load_manifest(manifest_path);
  const std::vector<SampleRecord> records =
      all_samples ? manifest.samples : split_dataset(manifest, SplitSpec{cfg.train_fraction, cfg.train.seed}).test;
  const auto samples = load_features(records, ckpt.combo, cfg.mfcc);
  const Evaluation ev = evaluate(ckpt, samples);

  std::printf("%s on %s, %s samples\n", std::string(model_kind_label(ckpt.params.spec.kind)).c_str(),
              ckpt.combo.label().c_str(), all_samples ? "all" : "test-split");
  print_metrics(ev.metrics);
  if (!predictions_path.empty()) {
    write_file(predictions_path, format_predictions_csv(ev.predictions));
  }
  if (!out_path.empty()) {
    nlohmann::json doc = {{"model", model_kind_name(ckpt.params.spec.kind)},
                          {"combo", ckpt.combo.label()},
                          {"samples", all_samples ? "all" : "test"},
                          {"metrics", metrics_json(ev.metrics)},
                          {"config", to_json(cfg)}};
    write_file(out_path, doc.dump(2) + "\n");
    write_sidecar(out_path, command, {{"checkpoint", ckpt_path}});
  }
  return kExitOk;
}

fs::path with_suffix(const fs::path& report, const std::string& ext) {
  fs::path p = report;
  return p.replace_extension(ext);
}

int cmd_grid(const std::string& manifest_path, const std::string& out_path, const std::string& models,
             const std::string& combos, std::size_t jobs, const ConfigFlags& flags, const std::string& command) {
  const RunConfig cfg = flags.resolve();
  const auto kinds = parse_kinds(models);
  const auto combo_list = parse_combos(combos);
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  const DatasetManifest manifest = load_manifest(manifest_path);

  GridOptions options;
  options.train = cfg.train;
  options.hidden = cfg.hidden;
  options.train_fraction = cfg.train_fraction;
  options.mfcc = cfg.mfcc;
  options.jobs = jobs;

  const auto start = std::chrono::steady_clock::now();
  const GridReport report = run_grid(manifest, kinds, combo_list, options);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path json_path = out_path;
  write_file(json_path, grid_report_to_json(report).dump(2) + "\n");
  const std::string table = render_grid_table(report);
  write_file(with_suffix(json_path, ".txt"), table);
  const auto failed = report.failed();
  write_sidecar(json_path, command,
                {{"jobs", jobs}, {"wall_seconds", seconds}, {"cells", report.cells.size()}, {"failed", failed.size()}});

  std::fputs(table.c_str(), stdout);
  for (const GridCell* c : failed) {
    std::fprintf(stderr, "cell %s %s failed: %s\n", std::string(model_kind_label(c->kind)).c_str(),
                 c->combo.label().c_str(), c->error.c_str());
  }
  std::printf("%zu cells (%zu failed) -> %s\n", report.cells.size(), failed.size(), json_path.c_str());
  return kExitOk;
}

int cmd_gradcheck(const std::string& models, double eps, double tolerance, std::uint64_t seed) {
  const auto kinds = models == "all" ? std::vector<ModelKind>{ModelKind::Lstm, ModelKind::BiLstm, ModelKind::MiniConv}
                                     : parse_kinds(models);
  bool ok = true;
  for (ModelKind kind : kinds) {
    const auto start = std::chrono::steady_clock::now();
    const GradCheckCase c = standard_gradcheck_case(kind, seed);
    const GradCheckReport r = gradient_check(c.params, c.input, eps, tolerance);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const bool pass = r.passed(tolerance);
    ok = ok && pass;
    std::printf("%-9s max_rel_err %.3e over %zu params (worst %s[%zu]) %.1f ms %s\n",
                std::string(model_kind_label(kind)).c_str(), r.max_relative_error, r.checked, r.worst.tensor.c_str(),
                r.worst.index, ms, pass ? "ok" : "FAIL");
  }
  return ok ? kExitOk : kExitNumeric;
}

int cmd_synth(const std::string& out_dir, const SyntheticOptions& options) {
  const DatasetManifest m = write_synthetic_dataset(out_dir, generate_synthetic(options));
  std::printf("%zu samples (%zu deceptive, %zu truthful) -> %s\n", m.n_total(), m.n_deceptive(), m.n_truthful(),
              (fs::path(out_dir) / "manifest.json").c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal deception-detection pipeline"};
  app.set_version_flag("--version", std::string(kVersionString));
  app.require_subcommand(1);

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  std::string manifest_path;
  auto* validate = app.add_subcommand("validate", "Check every file referenced by a manifest");
  validate->add_option("manifest", manifest_path, "Manifest JSON")->required();

  std::string wav_path, out_path, config_path;
  auto* extract = app.add_subcommand("extract-audio", "Write the MFCC matrix of a WAV file as CSV");
  extract->add_option("wav", wav_path, "16 kHz mono 16-bit PCM WAV")->required();
  extract->add_option("-o,--output", out_path, "Output CSV")->required();
  extract->add_option("--config", config_path, "JSON config (mfcc section)")->check(CLI::ExistingFile);

  std::string model = "lstm", combo = "v,a,t", history_path;
  ConfigFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train one classifier on the training split");
  train_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  train_cmd->add_option("--model", model, "lstm, bilstm or miniconv")->capture_default_str();
  train_cmd->add_option("--combo", combo, "Modalities, e.g. v,a,t")->capture_default_str();
  train_cmd->add_option("-o,--output", out_path, "Checkpoint JSON")->required();
  train_cmd->add_option("--history", history_path, "Optional per-epoch CSV");
  train_flags.attach(*train_cmd);

  std::string ckpt_path, predictions_path;
  bool all_samples = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", ckpt_path, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  eval_cmd->add_flag("--all", all_samples, "Evaluate every sample instead of the checkpoint's test split");
  eval_cmd->add_option("--predictions", predictions_path, "Write sample_id,probability,predicted,label CSV");
  eval_cmd->add_option("-o,--output", out_path, "Write metrics JSON");

  std::string models = "lstm,bilstm,miniconv", combos = "all";
  std::size_t jobs = 1;
  ConfigFlags grid_flags;
  auto* grid = app.add_subcommand("grid", "Train and evaluate every model x modality cell");
  grid->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  grid->add_option("-o,--output", out_path, "Report JSON (table written next to it as .txt)")->required();
  grid->add_option("--models", models, "Comma-separated model kinds")->capture_default_str();
  grid->add_option("--combos", combos, "Semicolon-separated combos such as \"v;a,t\", or all")
      ->capture_default_str();
  grid->add_option("--jobs", jobs, "Cells trained in parallel")->capture_default_str();
  grid_flags.attach(*grid);

  std::string gc_models = "all";
  double eps = 1e-4, tolerance = 1e-4;
  std::uint64_t gc_seed = 0;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gradcheck->add_option("--model", gc_models, "lstm, bilstm, miniconv, a comma list, or all")->capture_default_str();
  gradcheck->add_option("--eps", eps, "Finite-difference step")->capture_default_str();
  gradcheck->add_option("--tol", tolerance, "Maximum relative error")->capture_default_str();
  gradcheck->add_option("--seed", gc_seed, "Seed for parameters and input")->capture_default_str();

  std::string synth_dir;
  SyntheticOptions synth_options;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset with a manifest");
  synth->add_option("-o,--output", synth_dir, "Output directory")->required();
  synth->add_option("--samples", synth_options.samples, "Number of samples")->capture_default_str();
  synth->add_option("--seed", synth_options.seed, "Generator seed")->capture_default_str();
  synth->add_option("--audio-seconds", synth_options.audio_seconds, "Clip length")->capture_default_str();
  synth->add_option("--frames", synth_options.landmark_frames, "Landmark frames")->capture_default_str();
  synth->add_option("--tokens", synth_options.text_tokens, "Tokens per transcript")->capture_default_str();
  synth->add_option("--text-dim", synth_options.text_dim, "Embedding width")->capture_default_str();
  auto* signal_dims = synth->add_option("--text-signal-dims", synth_options.text_signal_dims,
                                        "Embedding dims carrying the label signal (default: half the width)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(manifest_path);
    if (*extract) return cmd_extract_audio(wav_path, out_path, config_path, command);
    if (*train_cmd) return cmd_train(manifest_path, model, combo, out_path, history_path, train_flags, command);
    if (*eval_cmd) return cmd_eval(ckpt_path, manifest_path, all_samples, predictions_path, out_path, command);
    if (*grid) return cmd_grid(manifest_path, out_path, models, combos, jobs, grid_flags, command);
    if (*gradcheck) return cmd_gradcheck(gc_models, eps, tolerance, gc_seed);
    if (*synth) {
      if (signal_dims->count() == 0) synth_options.text_signal_dims = std::max<std::size_t>(1, synth_options.text_dim / 2);
      return cmd_synth(synth_dir, synth_options);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.kind() == ErrorKind::Usage) std::fputs(app.help().c_str(), stderr);
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
