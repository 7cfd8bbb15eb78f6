// Copyright 2026 The fsed Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <map>
#include <optional>

#include "bench.h"
#include "fsed/audio.h"
#include "fsed/checkpoint.h"
#include "fsed/detector.h"
#include "fsed/dsp.h"
#include "fsed/error.h"
#include "fsed/evaluator.h"
#include "fsed/manifest.h"
#include "fsed/synthesis.h"
#include "fsed/synthetic_bank.h"
#include "fsed/trainer.h"

#ifndef FSED_VERSION
#define FSED_VERSION "0.0.0"
#endif

namespace fsed::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr uint64_t kDefaultSeed = 1;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path with_suffix(const fs::path& path, const std::string& suffix) { return fs::path(path.string() + suffix); }

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::vector<fs::path> wav_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Support sets per class from manifest rows that carry a class and onset.
std::map<std::string, SupportSet> load_support(const fs::path& manifest, const FeatureExtractor& fx,
                                               int window_frames) {
  std::map<std::string, SupportSet> sets;
  for (const auto& r : read_manifest(manifest)) {
    if (!r.label || !r.onset_s) {
      throw Error(ErrorCode::kIo, "support row for " + r.path.string() + " needs a class and an onset");
    }
    auto& set = sets[*r.label];
    set.label = *r.label;
    set.examples.push_back(support_window(fx.extract(read_wav(r.path)), *r.onset_s, window_frames));
  }
  if (sets.empty()) throw Error(ErrorCode::kEmptySupport, "support manifest " + manifest.string() + " is empty");
  return sets;
}

std::map<std::string, Prototype> prototypes(const Network<float>& net,
                                            const std::map<std::string, SupportSet>& support, int workers) {
  std::map<std::string, Prototype> out;
  for (const auto& [label, set] : support) out.emplace(label, compute_prototype(net, set, workers));
  return out;
}

struct Common {
  uint64_t seed = kDefaultSeed;
  int workers = 1;
};

class Runner {
 public:
  Runner(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
      : args_(args), out_(out), err_(err) {}

  int run();

 private:
  void add_features();
  void add_synth_bank();
  void add_synth();
  void add_train();
  void add_detect();
  void add_tune();
  void add_eval();
  void add_bench();

  RunManifest manifest(const CLI::App* sub, uint64_t seed) const;
  void finish(RunManifest m, const fs::path& path) const;

  const std::vector<std::string>& args_;
  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"Few-shot sound event detection with a background-noise class"};
  std::function<void()> action_;
  std::string started_;

  // Option storage.
  Common common_;
  fs::path input_, output_, out_dir_, manifest_path_, checkpoint_, support_, query_dir_, dev_dir_, truth_,
      detections_, sigma_file_, history_;
  std::string target_;
  std::optional<double> sigma_;
  int clips_ = 500, clips_per_class_ = 20, distractors_ = 0, grid_ = 101, min_gap_ = 1, min_len_ = 1;
  double duration_ = 30.0, presence_ = 0.5, collar_ = 0.5, background_s_ = 40.0;
  std::vector<double> ebr_ = {-6.0, 0.0, 6.0};
  std::vector<std::string> held_out_;
  bool no_background_ = false, final_epoch_ = false, offsets_ = false, no_standardize_ = false;
  TrainConfig train_;
  BenchConfig bench_;
};

RunManifest Runner::manifest(const CLI::App* sub, uint64_t seed) const {
  RunManifest m;
  m.command = sub->get_name();
  m.argv = args_;
  m.config = sub->config_to_str(true, false);
  m.seed = seed;
  m.version = version_string();
  m.started_utc = started_;
  return m;
}

void Runner::finish(RunManifest m, const fs::path& path) const {
  m.finished_utc = utc_now();
  write_run_manifest(path, m);
}

void Runner::add_features() {
  CLI::App* sub = app_.add_subcommand("features", "Write the log-mel features of a WAV file");
  sub->add_option("--input", input_, "Input WAV")->required()->check(CLI::ExistingFile);
  sub->add_option("--output", output_, "Feature dump path")->required();
  sub->callback([this, sub] {
    action_ = [this, sub] {
      const FeatureExtractor fx;
      const MelFeatures f = fx.extract(read_wav(input_));
      ensure_parent(output_);
      write_feature_dump(output_, f);
      out_ << f.channels() << " channels x " << f.frames() << " frames\n";
      RunManifest m = manifest(sub, 0);
      m.inputs = {{"wav", input_.string()}};
      m.outputs = {{"features", output_.string()}};
      finish(m, with_suffix(output_, ".run.json"));
    };
  });
}

void Runner::add_synth_bank() {
  CLI::App* sub = app_.add_subcommand("synth-bank", "Generate synthetic tone-burst events and noise backgrounds");
  sub->add_option("--out-dir", out_dir_, "Output directory")->required();
  sub->add_option("--seed", common_.seed, "Random seed")->capture_default_str();
  sub->add_option("--clips-per-class", clips_per_class_, "Event clips per class")->capture_default_str();
  sub->add_option("--background-s", background_s_, "Length of each background recording")->capture_default_str();
  sub->callback([this, sub] {
    action_ = [this, sub] {
      SyntheticBankConfig cfg;
      cfg.clips_per_class = clips_per_class_;
      cfg.background_s = background_s_;
      Rng rng(common_.seed);
      const SourceBank bank = make_synthetic_bank(rng, default_tone_classes(), cfg);
      fs::create_directories(out_dir_ / "events");
      fs::create_directories(out_dir_ / "backgrounds");
      std::vector<ManifestRecord> records;
      char name[64];
      for (int id = 1; id <= bank.event_class_count(); ++id) {
        const auto& clips = bank.events[static_cast<size_t>(id - 1)];
        for (size_t i = 0; i < clips.size(); ++i) {
          std::snprintf(name, sizeof(name), "%s_%03zu.wav", bank.class_name(id).c_str(), i);
          const fs::path p = out_dir_ / "events" / name;
          write_wav(p, clips[i]);
          records.push_back({p, "event", bank.class_name(id), 0.0, clips[i].duration_s()});
        }
      }
      for (size_t i = 0; i < bank.backgrounds.size(); ++i) {
        std::snprintf(name, sizeof(name), "background_%03zu.wav", i);
        const fs::path p = out_dir_ / "backgrounds" / name;
        write_wav(p, bank.backgrounds[i]);
        records.push_back({p, "background", std::nullopt, std::nullopt, std::nullopt});
      }
      write_manifest(out_dir_ / "manifest.jsonl", records);
      out_ << records.size() << " clips written to " << out_dir_.string() << "\n";
      RunManifest m = manifest(sub, common_.seed);
      m.outputs = {{"manifest", (out_dir_ / "manifest.jsonl").string()}};
      finish(m, out_dir_ / "run.json");
    };
  });
}

void Runner::add_synth() {
  CLI::App* sub = app_.add_subcommand("synth", "Mix evaluation clips for one target class");
  sub->add_option("--manifest", manifest_path_, "Source manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out-dir", out_dir_, "Output directory")->required();
  sub->add_option("--target", target_, "Target event class")->required();
  sub->add_option("--clips", clips_, "Number of clips")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--duration", duration_, "Clip length in seconds")->capture_default_str();
  sub->add_option("--presence", presence_, "Probability that a clip holds the target")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--ebr", ebr_, "Event-to-background ratios in dB, drawn uniformly")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--distractors", distractors_, "Unannotated non-target events per clip")->capture_default_str();
  sub->add_option("--seed", common_.seed, "Random seed")->capture_default_str();
  sub->callback([this, sub] {
    action_ = [this, sub] {
      const auto records = read_manifest(manifest_path_);
      const SourceBank bank = load_source_bank(records);
      bank.validate();
      const int target = bank.class_id(target_);
      EvalClipConfig cfg;
      cfg.duration_s = duration_;
      cfg.presence_rate = presence_;
      cfg.ebr_set_db = ebr_;
      cfg.distractors = distractors_;
      fs::create_directories(out_dir_);
      const Rng base(common_.seed);
      std::vector<Event> truth;
      int positives = 0;
      char name[32];
      for (int i = 0; i < clips_; ++i) {
        Rng rng = base.split(static_cast<uint64_t>(i));
        const EvalClip clip = generate_eval_clip(rng, bank, target, cfg);
        std::snprintf(name, sizeof(name), "clip_%04d", i);
        write_wav(out_dir_ / (std::string(name) + ".wav"), clip.clip);
        for (const auto& a : clip.clip.annotations) truth.push_back({name, a.onset_s, a.offset_s, a.label, 0.0});
        positives += clip.clip.annotations.empty() ? 0 : 1;
      }
      write_events_tsv(out_dir_ / "truth.tsv", truth, false);
      out_ << clips_ << " clips, " << positives << " with the target event\n";
      RunManifest m = manifest(sub, common_.seed);
      m.inputs = {{"manifest", manifest_path_.string()}};
      m.outputs = {{"clips", out_dir_.string()}, {"truth", (out_dir_ / "truth.tsv").string()}};
      finish(m, out_dir_ / "run.json");
    };
  });
}

void Runner::add_train() {
  CLI::App* sub = app_.add_subcommand("train", "Train the embedding network on a source manifest");
  sub->add_option("--manifest", manifest_path_, "Source manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", output_, "Checkpoint path")->required();
  sub->add_option("--history", history_, "History CSV (default: <out>.history.csv)");
  sub->add_option("--held-out", held_out_, "Classes kept out of training and used for verification")
      ->delimiter(',');
  sub->add_option("--epochs", train_.max_epochs, "Maximum epochs")->capture_default_str();
  sub->add_option("--batch-size", train_.batch_size, "Pairs per step")->capture_default_str();
  sub->add_option("--steps-per-epoch", train_.steps_per_epoch, "Steps per epoch (0: derived from the sources)")
      ->capture_default_str();
  sub->add_option("--lr", train_.lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--margin", train_.loss.margin, "Contrastive margin")->capture_default_str();
  sub->add_option("--background-weight", train_.loss.background_weight, "Margin weight for background pairs")
      ->capture_default_str();
  sub->add_option("--verification-pairs", train_.verification_pairs, "Pairs in the verification set")
      ->capture_default_str();
  sub->add_flag("--no-background-class", no_background_, "Ablation: event-only pairs with unit margin weight");
  sub->add_flag("--final-epoch", final_epoch_, "Keep the last epoch instead of the best verification epoch");
  sub->add_flag("--no-input-standardization", no_standardize_, "Feed raw log-mel windows to the network");
  sub->add_option("--seed", common_.seed, "Random seed")->capture_default_str();
  sub->add_option("--workers", common_.workers, "Worker threads")->capture_default_str();
  sub->callback([this, sub] {
    action_ = [this, sub] {
      const auto records = read_manifest(manifest_path_);
      BankLoadOptions train_opts;
      train_opts.exclude_classes = held_out_;
      const SourceBank bank = load_source_bank(records, train_opts);
      std::optional<SourceBank> held;
      if (!held_out_.empty()) {
        BankLoadOptions held_opts;
        held_opts.include_classes = held_out_;
        held = load_source_bank(records, held_opts);
        for (const auto& name : held_out_) held->class_id(name);
      }
      TrainConfig cfg = train_;
      cfg.seed = common_.seed;
      cfg.workers = common_.workers;
      cfg.background_class = !no_background_;
      cfg.select_best = !final_epoch_;
      cfg.network.standardize_input = !no_standardize_;
      cfg.on_epoch = [this](const EpochRecord& e) {
        char line[128];
        std::snprintf(line, sizeof(line), "epoch %d train %.5f verif %.5f\n", e.epoch, e.train_loss,
                      e.verification_loss);
        out_ << line << std::flush;
      };
      const FeatureExtractor fx;
      const TrainResult result = train(bank, held ? &*held : nullptr, cfg, fx);
      ensure_parent(output_);
      save_checkpoint(result.network, output_);
      const fs::path history = history_.empty() ? with_suffix(output_, ".history.csv") : history_;
      write_history_csv(history, result.history);
      out_ << "best epoch " << result.history.best_epoch << ", " << result.network.parameter_count()
           << " parameters\n";
      RunManifest m = manifest(sub, common_.seed);
      m.inputs = {{"manifest", manifest_path_.string()}};
      m.outputs = {{"checkpoint", output_.string()}, {"history", history.string()}};
      finish(m, with_suffix(output_, ".run.json"));
    };
  });
}

void Runner::add_detect() {
  CLI::App* sub = app_.add_subcommand("detect", "Detect target events in every WAV of a query directory");
  sub->add_option("--checkpoint", checkpoint_, "Trained checkpoint")->required();
  sub->add_option("--support", support_, "Support manifest: one row per shot with class and onset")->required();
  sub->add_option("--query-dir", query_dir_, "Directory of query WAVs")->required();
  auto* sigma = sub->add_option("--sigma", sigma_, "Distance threshold for every class");
  auto* sigma_file = sub->add_option("--sigma-file", sigma_file_, "Per-class thresholds from `tune`");
  sigma->excludes(sigma_file);
  sub->add_option("--out", output_, "Detections TSV")->required();
  sub->add_option("--min-gap", min_gap_, "Negative windows bridged inside one event")->capture_default_str();
  sub->add_option("--min-len", min_len_, "Minimum event length in windows")->capture_default_str();
  sub->add_option("--workers", common_.workers, "Worker threads")->capture_default_str();
  sub->callback([this, sub, sigma, sigma_file] {
    if (sigma->count() + sigma_file->count() == 0) throw CLI::RequiredError("--sigma or --sigma-file");
    action_ = [this, sub] {
      const Network<float> net = load_checkpoint(checkpoint_);
      const FeatureExtractor fx;
      const InferenceConfig inf{.window_frames = net.config().frames, .workers = common_.workers};
      const auto protos = prototypes(net, load_support(support_, fx, inf.window_frames), common_.workers);
      std::map<std::string, double> sigmas;
      if (sigma_) {
        for (const auto& [label, p] : protos) sigmas[label] = *sigma_;
      } else {
        std::ifstream in(sigma_file_);
        if (!in) throw Error(ErrorCode::kIo, "cannot read " + sigma_file_.string());
        const auto j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kIo, sigma_file_.string() + " is not a JSON object");
        for (const auto& [label, p] : protos) {
          if (!j.contains(label) || !j[label].is_number()) {
            throw Error(ErrorCode::kUnknownClass, "no threshold for class '" + label + "' in " + sigma_file_.string());
          }
          sigmas[label] = j[label].get<double>();
        }
      }
      std::vector<Event> detections;
      const auto queries = wav_files(query_dir_);
      for (const auto& q : queries) {
        const MelFeatures f = fx.extract(read_wav(q));
        const auto embeddings = embed_windows(net, f, inf);
        const std::string id = q.stem().string();
        for (const auto& [label, proto] : protos) {
          const DistanceSequence ds = distances_to_prototype(proto, embeddings, f.frame_hop_s, inf);
          const DetectionConfig dc{.sigma = sigmas[label], .min_gap_windows = min_gap_, .min_len_windows = min_len_};
          for (const auto& d : detect_events(ds, dc, label)) {
            detections.push_back({id, d.onset_s, d.offset_s, d.label, d.score});
          }
        }
      }
      ensure_parent(output_);
      write_events_tsv(output_, detections, true);
      out_ << detections.size() << " detections in " << queries.size() << " clips\n";
      RunManifest m = manifest(sub, 0);
      m.inputs = {{"checkpoint", checkpoint_.string()}, {"support", support_.string()},
                  {"query_dir", query_dir_.string()}};
      if (!sigma_) m.inputs.emplace_back("sigma_file", sigma_file_.string());
      m.outputs = {{"detections", output_.string()}};
      finish(m, with_suffix(output_, ".run.json"));
    };
  });
}

void Runner::add_tune() {
  CLI::App* sub = app_.add_subcommand("tune", "Choose per-class thresholds on a development set");
  sub->add_option("--checkpoint", checkpoint_, "Trained checkpoint")->required();
  sub->add_option("--support", support_, "Support manifest")->required();
  sub->add_option("--dev-dir", dev_dir_, "Directory of development WAVs")->required();
  sub->add_option("--dev-truth", truth_, "Development ground truth TSV")->required();
  sub->add_option("--out", output_, "Threshold JSON")->required();
  sub->add_option("--grid", grid_, "Candidate thresholds")->capture_default_str();
  sub->add_option("--min-gap", min_gap_, "Negative windows bridged inside one event")->capture_default_str();
  sub->add_option("--min-len", min_len_, "Minimum event length in windows")->capture_default_str();
  sub->add_option("--collar", collar_, "Onset collar in seconds")->capture_default_str();
  sub->add_option("--workers", common_.workers, "Worker threads")->capture_default_str();
  sub->callback([this, sub] {
    action_ = [this, sub] {
      const Network<float> net = load_checkpoint(checkpoint_);
      const FeatureExtractor fx;
      const InferenceConfig inf{.window_frames = net.config().frames, .workers = common_.workers};
      const auto protos = prototypes(net, load_support(support_, fx, inf.window_frames), common_.workers);
      const auto truth = read_events_tsv(truth_);
      const auto clips = wav_files(dev_dir_);
      std::map<std::string, std::vector<DevClip>> per_class;
      for (const auto& [label, p] : protos) per_class[label];
      for (const auto& path : clips) {
        const MelFeatures f = fx.extract(read_wav(path));
        const auto embeddings = embed_windows(net, f, inf);
        const std::string id = path.stem().string();
        for (const auto& [label, proto] : protos) {
          DevClip dc;
          dc.clip_id = id;
          dc.distances = distances_to_prototype(proto, embeddings, f.frame_hop_s, inf);
          for (const auto& e : truth) {
            if (e.clip_id == id && e.label == label) dc.references.push_back(e);
          }
          per_class[label].push_back(std::move(dc));
        }
      }
      const TuneConfig tc{.grid_points = grid_, .min_gap_windows = min_gap_, .min_len_windows = min_len_,
                          .collar_s = collar_};
      const auto results = tune_thresholds(per_class, tc);
      ordered_json j = ordered_json::object();
      for (const auto& [label, r] : results) {
        j[label] = r.sigma;
        out_ << label << ": sigma " << r.sigma << ", dev F1 " << r.f1 << "\n";
      }
      ensure_parent(output_);
      std::ofstream(output_) << j.dump(2) << "\n";
      RunManifest m = manifest(sub, 0);
      m.inputs = {{"checkpoint", checkpoint_.string()}, {"support", support_.string()},
                  {"dev_dir", dev_dir_.string()}, {"dev_truth", truth_.string()}};
      m.outputs = {{"thresholds", output_.string()}};
      finish(m, with_suffix(output_, ".run.json"));
    };
  });
}

void Runner::add_eval() {
  CLI::App* sub = app_.add_subcommand("eval", "Score detections against ground truth (event-based F1)");
  sub->add_option("--detections", detections_, "Detections TSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--truth", truth_, "Ground truth TSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--collar", collar_, "Onset collar in seconds")->capture_default_str();
  sub->add_flag("--offsets", offsets_, "Also require matching offsets");
  sub->add_option("--out", output_, "Report JSON");
  sub->callback([this, sub] {
    action_ = [this, sub] {
      const auto dets = read_events_tsv(detections_);
      const auto refs = read_events_tsv(truth_);
      const EvalReport report =
          evaluate(refs, dets, collar_, offsets_ ? MatchMode::kOnsetOffset : MatchMode::kOnsetOnly);
      out_ << report_table(report);
      if (!output_.empty()) {
        ensure_parent(output_);
        std::ofstream(output_) << report_json(report, collar_) << "\n";
        RunManifest m = manifest(sub, 0);
        m.inputs = {{"detections", detections_.string()}, {"truth", truth_.string()}};
        m.outputs = {{"report", output_.string()}};
        finish(m, with_suffix(output_, ".run.json"));
      }
    };
  });
}

void Runner::add_bench() {
  CLI::App* sub = app_.add_subcommand("bench-synthetic", "Train both configurations and compare few-shot F1");
  sub->add_option("--out-dir", out_dir_, "Output directory")->required();
  sub->add_option("--seed", bench_.seed, "Random seed")->capture_default_str();
  sub->add_option("--epochs", bench_.epochs, "Training epochs per configuration")->capture_default_str();
  sub->add_option("--draws", bench_.draws, "Support draws per shot count")->capture_default_str();
  sub->add_option("--dev-clips", bench_.dev_clips, "Development clips")->capture_default_str();
  sub->add_option("--eval-clips", bench_.eval_clips, "Evaluation clips")->capture_default_str();
  sub->add_option("--clip-s", bench_.clip_s, "Query clip length in seconds")->capture_default_str();
  sub->add_option("--distractors", bench_.distractors, "Unannotated non-target events per query clip")
      ->capture_default_str();
  sub->add_option("--min-gap", bench_.min_gap_windows, "Negative windows bridged inside one event")
      ->capture_default_str();
  sub->add_option("--workers", bench_.workers, "Worker threads")->capture_default_str();
  sub->callback([this, sub] {
    action_ = [this, sub] {
      const BenchResult result = run_bench(bench_, out_dir_);
      out_ << bench_report_table(result);
      RunManifest m = manifest(sub, bench_.seed);
      m.outputs = {{"report", (out_dir_ / "report.json").string()},
                   {"table", (out_dir_ / "report.txt").string()}};
      finish(m, out_dir_ / "run.json");
    };
  });
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return kExitUsage;
    case ErrorCode::kNonFiniteGradient:
    case ErrorCode::kInvalidDistance: return kExitNumeric;
    default: return kExitData;
  }
}

int Runner::run() {
  app_.set_version_flag("--version", version_string());
  app_.set_config("--config", "", "TOML config; command-line flags take precedence");
  app_.allow_config_extras(CLI::config_extras_mode::error);
  app_.require_subcommand(1);
  add_features();
  add_synth_bank();
  add_synth();
  add_train();
  add_detect();
  add_tune();
  add_eval();
  add_bench();

  std::vector<const char*> argv;
  argv.reserve(args_.size());
  for (const auto& a : args_) argv.push_back(a.c_str());
  try {
    app_.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app_.exit(e, out_, err_);
    return code == 0 ? kExitOk : kExitUsage;
  }
  started_ = utc_now();
  try {
    if (action_) action_();
    return kExitOk;
  } catch (const Error& e) {
    err_ << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace

std::string version_string() { return FSED_VERSION; }

void write_run_manifest(const fs::path& path, const RunManifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  auto pairs = [](const std::vector<std::pair<std::string, std::string>>& v) {
    ordered_json o = ordered_json::object();
    for (const auto& [k, p] : v) o[k] = p;
    return o;
  };
  j["inputs"] = pairs(m.inputs);
  j["outputs"] = pairs(m.outputs);
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Runner runner(args, out, err);
    return runner.run();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace fsed::cli
