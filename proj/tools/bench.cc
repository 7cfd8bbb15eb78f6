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

#include "bench.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "fsed/checkpoint.h"
#include "fsed/detector.h"
#include "fsed/error.h"
#include "fsed/evaluator.h"
#include "fsed/parallel.h"

namespace fsed::cli {
namespace {

constexpr uint64_t kEventStream = 1;
constexpr uint64_t kTrainBackgroundStream = 2;
constexpr uint64_t kDevBackgroundStream = 3;
constexpr uint64_t kEvalBackgroundStream = 4;
constexpr uint64_t kTrainSeedStream = 10;
constexpr uint64_t kDevQueryStream = 20;
constexpr uint64_t kEvalQueryStream = 21;
constexpr uint64_t kOnsetQueryStream = 22;
constexpr uint64_t kSupportStream = 30;
constexpr uint64_t kOnsetSupportStream = 31;

constexpr double kSupportClipS = 3.0;
constexpr int kCurveClips = 4;
constexpr int kCurveShots = 5;

std::vector<AudioClip> make_backgrounds(const Rng& root, uint64_t stream, const SyntheticBankConfig& cfg) {
  Rng rng = root.split(stream);
  std::vector<AudioClip> out;
  for (NoiseColor color : {NoiseColor::kWhite, NoiseColor::kPink, NoiseColor::kBrown}) {
    for (int i = 0; i < cfg.backgrounds_per_color; ++i) {
      const double level = rng.uniform(cfg.min_background_rms, cfg.max_background_rms);
      out.push_back(synth_noise(rng, color, cfg.background_s, level, cfg.sample_rate));
    }
  }
  return out;
}

struct QuerySet {
  std::vector<std::string> ids;
  std::vector<MelFeatures> features;
  std::vector<Event> references;
};

EvalClipConfig query_clip_config(const BenchConfig& cfg) {
  EvalClipConfig ec;
  ec.duration_s = cfg.clip_s;
  ec.presence_rate = cfg.presence;
  ec.distractors = cfg.distractors;
  return ec;
}

QuerySet make_queries(const BenchConfig& cfg, const SourceBank& bank, uint64_t stream, int count,
                      const std::string& prefix, const FeatureExtractor& fx) {
  const Rng base = Rng(cfg.seed).split(stream);
  const EvalClipConfig ec = query_clip_config(cfg);
  QuerySet q;
  q.ids.resize(static_cast<size_t>(count));
  q.features.resize(static_cast<size_t>(count));
  std::vector<std::vector<Event>> refs(static_cast<size_t>(count));
  parallel_for(static_cast<size_t>(count), cfg.workers, [&](size_t i) {
    Rng rng = base.split(i);
    const EvalClip clip = generate_eval_clip(rng, bank, 1, ec);
    char id[32];
    std::snprintf(id, sizeof(id), "%s%03zu", prefix.c_str(), i);
    q.ids[i] = id;
    q.features[i] = fx.extract(clip.clip);
    for (const auto& a : clip.clip.annotations) refs[i].push_back({id, a.onset_s, a.offset_s, a.label, 0.0});
  });
  for (auto& r : refs) q.references.insert(q.references.end(), r.begin(), r.end());
  return q;
}

// k distinct support sources, each mixed into a short background excerpt
// and cut to the window centered on its onset.
SupportSet draw_support(Rng& rng, const SourceBank& support, int k, std::span<const double> ebr_db,
                        const FeatureExtractor& fx, int window_frames) {
  const auto& pool = support.events.front();
  if (k < 1 || static_cast<size_t>(k) > pool.size()) {
    throw Error(ErrorCode::kInvalidConfig, "support pool holds " + std::to_string(pool.size()) + " clips, " +
                                               std::to_string(k) + " requested");
  }
  std::vector<size_t> order(pool.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (size_t i = 0; i < static_cast<size_t>(k); ++i) std::swap(order[i], order[i + rng.index(order.size() - i)]);

  EvalClipConfig ec;
  ec.duration_s = kSupportClipS;
  ec.presence_rate = 1.0;
  ec.ebr_set_db.assign(ebr_db.begin(), ebr_db.end());
  SupportSet set;
  set.label = support.class_names.front();
  for (int i = 0; i < k; ++i) {
    SourceBank single;
    single.sample_rate = support.sample_rate;
    single.class_names = support.class_names;
    single.events = {{pool[order[static_cast<size_t>(i)]]}};
    single.backgrounds = support.backgrounds;
    const EvalClip clip = generate_eval_clip(rng, single, 1, ec);
    set.examples.push_back(support_window(fx.extract(clip.clip), clip.clip.annotations.front().onset_s,
                                          window_frames));
  }
  return set;
}

std::vector<DevClip> dev_clips(const QuerySet& q, const std::vector<std::vector<std::vector<float>>>& embeddings,
                               const Prototype& proto, double frame_hop_s, const InferenceConfig& inf) {
  std::vector<DevClip> out(q.ids.size());
  for (size_t i = 0; i < q.ids.size(); ++i) {
    out[i].clip_id = q.ids[i];
    out[i].distances = distances_to_prototype(proto, embeddings[i], frame_hop_s, inf);
    for (const auto& r : q.references) {
      if (r.clip_id == q.ids[i]) out[i].references.push_back(r);
    }
  }
  return out;
}

double clip_set_f1(std::span<const DevClip> clips, const DetectionConfig& detection, const std::string& label) {
  std::vector<Event> refs, dets;
  for (const auto& c : clips) {
    refs.insert(refs.end(), c.references.begin(), c.references.end());
    for (const auto& d : detect_events(c.distances, detection, label)) {
      dets.push_back({c.clip_id, d.onset_s, d.offset_s, d.label, d.score});
    }
  }
  const EvalReport report = evaluate(refs, dets);
  const auto it = report.per_class.find(label);
  return it == report.per_class.end() ? 0.0 : it->second.f1;
}

void write_curves(const std::filesystem::path& path, const std::vector<DevClip>& clips) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "clip_id,time_s,distance,target_active\n";
  const size_t n = std::min<size_t>(clips.size(), kCurveClips);
  char line[128];
  for (size_t c = 0; c < n; ++c) {
    const auto& ds = clips[c].distances;
    for (size_t i = 0; i < ds.values.size(); ++i) {
      const double t = ds.time_at(i);
      int active = 0;
      for (const auto& r : clips[c].references) active |= (t >= r.onset_s && t < r.offset_s) ? 1 : 0;
      std::snprintf(line, sizeof(line), "%s,%.2f,%.6f,%d\n", clips[c].clip_id.c_str(), t, ds.values[i], active);
      out << line;
    }
  }
}

std::vector<std::vector<std::vector<float>>> embed_queries(const Network<float>& net, const QuerySet& q,
                                                           const InferenceConfig& inf) {
  std::vector<std::vector<std::vector<float>>> out;
  out.reserve(q.features.size());
  for (const auto& f : q.features) out.push_back(embed_windows(net, f, inf));
  return out;
}

}  // namespace

const ShotResult* ConfigResult::at(int k) const {
  for (const auto& s : shots) {
    if (s.shots == k) return &s;
  }
  return nullptr;
}

BenchBanks make_bench_banks(const BenchConfig& cfg) {
  const Rng root(cfg.seed);
  const auto classes = default_tone_classes();
  Rng event_rng = root.split(kEventStream);
  const SourceBank all = make_synthetic_bank(event_rng, classes, cfg.bank);
  const int target_id = all.class_id(cfg.target_class);
  const auto& target_events = all.events[static_cast<size_t>(target_id - 1)];
  const int query_pool = static_cast<int>(target_events.size()) - cfg.support_pool;
  if (cfg.support_pool < 1 || query_pool < 2) {
    throw Error(ErrorCode::kInvalidConfig, "target class needs support clips plus two query clips");
  }
  for (const auto& name : cfg.train_classes) {
    if (name == cfg.target_class || name == cfg.verify_class) {
      throw Error(ErrorCode::kLeakage, "class '" + name + "' is both a training and a held-out class");
    }
  }

  BenchBanks b;
  b.train = all.subset(cfg.train_classes);
  b.train.backgrounds = make_backgrounds(root, kTrainBackgroundStream, cfg.bank);
  const std::vector<std::string> verify_names = {cfg.verify_class};
  b.verify = all.subset(verify_names);
  b.verify.backgrounds = b.train.backgrounds;

  const auto dev_backgrounds = make_backgrounds(root, kDevBackgroundStream, cfg.bank);
  const auto eval_backgrounds = make_backgrounds(root, kEvalBackgroundStream, cfg.bank);
  const auto split = target_events.begin() + cfg.support_pool;
  const auto middle = split + query_pool / 2;

  b.support.sample_rate = all.sample_rate;
  b.support.class_names = {cfg.target_class};
  b.support.events = {std::vector<AudioClip>(target_events.begin(), split)};
  b.support.backgrounds = dev_backgrounds;

  auto query_bank = [&](std::vector<AudioClip> targets, std::vector<AudioClip> backgrounds) {
    SourceBank q;
    q.sample_rate = all.sample_rate;
    q.class_names = {cfg.target_class};
    q.events = {std::move(targets)};
    for (int id = 1; id <= all.event_class_count(); ++id) {
      if (id == target_id) continue;
      q.class_names.push_back(all.class_name(id));
      q.events.push_back(all.events[static_cast<size_t>(id - 1)]);
    }
    q.backgrounds = std::move(backgrounds);
    return q;
  };
  b.query_dev = query_bank(std::vector<AudioClip>(split, middle), dev_backgrounds);
  b.query_eval = query_bank(std::vector<AudioClip>(middle, target_events.end()), eval_backgrounds);
  return b;
}

std::vector<double> onset_distance_by_shots(const Network<float>& net, const BenchBanks& banks,
                                            const BenchConfig& cfg, std::span<const int> shots, int draws,
                                            int clips) {
  const FeatureExtractor fx;
  const int window = net.config().frames;
  const Rng query_base = Rng(cfg.seed).split(kOnsetQueryStream);
  EvalClipConfig ec = query_clip_config(cfg);
  ec.presence_rate = 1.0;
  std::vector<std::vector<float>> onset_embeddings(static_cast<size_t>(clips));
  parallel_for(static_cast<size_t>(clips), cfg.workers, [&](size_t i) {
    Rng rng = query_base.split(i);
    const EvalClip clip = generate_eval_clip(rng, banks.query_eval, 1, ec);
    const MelFeatures w = support_window(fx.extract(clip.clip), clip.clip.annotations.front().onset_s, window);
    const Vector<float> e = forward(net, w);
    onset_embeddings[i].assign(e.data(), e.data() + e.size());
  });

  const Rng support_base = Rng(cfg.seed).split(kOnsetSupportStream);
  std::vector<double> means;
  for (int k : shots) {
    double total = 0.0;
    for (int d = 0; d < draws; ++d) {
      Rng rng = support_base.split(static_cast<uint64_t>(k)).split(static_cast<uint64_t>(d));
      const Prototype proto = compute_prototype(net, draw_support(rng, banks.support, k, cfg.support_ebr_db, fx, window), cfg.workers);
      for (const auto& e : onset_embeddings) {
        total += pair_distance(std::span<const float>(proto.mean), std::span<const float>(e));
      }
    }
    means.push_back(total / (static_cast<double>(draws) * clips));
  }
  return means;
}

BenchResult run_bench(const BenchConfig& cfg, const std::filesystem::path& out_dir) {
  if (cfg.draws < 1 || cfg.dev_clips < 1 || cfg.eval_clips < 1 || cfg.shots.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "benchmark needs draws, dev clips, eval clips and shot counts");
  }
  std::filesystem::create_directories(out_dir);
  const FeatureExtractor fx;
  const BenchBanks banks = make_bench_banks(cfg);
  const QuerySet dev = make_queries(cfg, banks.query_dev, kDevQueryStream, cfg.dev_clips, "dev", fx);
  const QuerySet eval = make_queries(cfg, banks.query_eval, kEvalQueryStream, cfg.eval_clips, "eval", fx);

  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.max_epochs = cfg.epochs;
  tc.verification_pairs = cfg.verification_pairs;
  tc.workers = cfg.workers;
  tc.seed = Rng(cfg.seed).split(kTrainSeedStream).next_u64();
  const int window = tc.network.frames;

  // Support sets are shared by both configurations.
  const Rng support_base = Rng(cfg.seed).split(kSupportStream);
  std::vector<std::vector<SupportSet>> supports;
  for (int k : cfg.shots) {
    auto& per_k = supports.emplace_back();
    for (int d = 0; d < cfg.draws; ++d) {
      Rng rng = support_base.split(static_cast<uint64_t>(k)).split(static_cast<uint64_t>(d));
      per_k.push_back(draw_support(rng, banks.support, k, cfg.support_ebr_db, fx, window));
    }
  }

  const InferenceConfig inf{.window_frames = window, .window_hop_frames = 20, .workers = cfg.workers};
  const TuneConfig tune{.min_gap_windows = cfg.min_gap_windows};
  auto run_config = [&](const std::string& name, bool background_class, std::optional<Network<float>>* keep) {
    ConfigResult r;
    r.name = name;
    r.background_class = background_class;
    tc.background_class = background_class;
    const TrainResult trained = train(banks.train, &banks.verify, tc, fx);
    if (keep) *keep = trained.network;
    save_checkpoint(trained.network, out_dir / ("checkpoint_" + name + ".bin"));
    TrainHistory history = trained.history;
    write_history_csv(out_dir / ("history_" + name + ".csv"), history);
    r.best_epoch = history.best_epoch;
    r.final_train_loss = history.epochs.back().train_loss;
    r.final_verification_loss = history.epochs.back().verification_loss;

    const auto dev_emb = embed_queries(trained.network, dev, inf);
    const auto eval_emb = embed_queries(trained.network, eval, inf);
    for (size_t s = 0; s < cfg.shots.size(); ++s) {
      ShotResult sr;
      sr.shots = cfg.shots[s];
      for (int d = 0; d < cfg.draws; ++d) {
        const Prototype proto = compute_prototype(trained.network, supports[s][static_cast<size_t>(d)], cfg.workers);
        const auto dev_set = dev_clips(dev, dev_emb, proto, fx.hop_s(), inf);
        const ThresholdResult tuned = tune_threshold(dev_set, cfg.target_class, tune);
        const auto eval_set = dev_clips(eval, eval_emb, proto, fx.hop_s(), inf);
        sr.f1.push_back(clip_set_f1(
            eval_set, DetectionConfig{.sigma = tuned.sigma, .min_gap_windows = cfg.min_gap_windows}, cfg.target_class));
        sr.mean_sigma += tuned.sigma / cfg.draws;
        if (d == 0 && sr.shots == kCurveShots) write_curves(out_dir / ("curves_" + name + ".csv"), eval_set);
      }
      sr.mean_f1 = std::accumulate(sr.f1.begin(), sr.f1.end(), 0.0) / cfg.draws;
      r.shots.push_back(std::move(sr));
    }
    return r;
  };

  BenchResult result;
  result.proposed = run_config("proposed", true, &result.proposed_network);
  result.ablation = run_config("ablation", false, nullptr);

  std::ofstream(out_dir / "report.json") << bench_report_json(cfg, result) << "\n";
  std::ofstream(out_dir / "report.txt") << bench_report_table(result);
  return result;
}

std::string bench_report_json(const BenchConfig& cfg, const BenchResult& result) {
  using nlohmann::ordered_json;
  auto config_json = [](const ConfigResult& r) {
    ordered_json j;
    j["background_class"] = r.background_class;
    j["best_epoch"] = r.best_epoch;
    j["final_train_loss"] = r.final_train_loss;
    j["final_verification_loss"] = r.final_verification_loss;
    ordered_json f1 = ordered_json::object(), sigma = ordered_json::object(), draws = ordered_json::object();
    for (const auto& s : r.shots) {
      const std::string k = std::to_string(s.shots);
      f1[k] = s.mean_f1;
      sigma[k] = s.mean_sigma;
      draws[k] = s.f1;
    }
    j["f1"] = f1;
    j["mean_sigma"] = sigma;
    j["f1_per_draw"] = draws;
    return j;
  };
  ordered_json j;
  j["seed"] = cfg.seed;
  j["target_class"] = cfg.target_class;
  j["verify_class"] = cfg.verify_class;
  j["train_classes"] = cfg.train_classes;
  j["epochs"] = cfg.epochs;
  j["draws"] = cfg.draws;
  j["dev_clips"] = cfg.dev_clips;
  j["eval_clips"] = cfg.eval_clips;
  j["clip_s"] = cfg.clip_s;
  j["distractors"] = cfg.distractors;
  j["support_ebr_db"] = cfg.support_ebr_db;
  j["min_gap_windows"] = cfg.min_gap_windows;
  j["configs"]["proposed"] = config_json(result.proposed);
  j["configs"]["ablation"] = config_json(result.ablation);
  ordered_json delta = ordered_json::object();
  for (const auto& s : result.proposed.shots) {
    if (const ShotResult* a = result.ablation.at(s.shots)) delta[std::to_string(s.shots)] = s.mean_f1 - a->mean_f1;
  }
  j["f1_gain"] = delta;
  return j.dump(2);
}

std::string bench_report_table(const BenchResult& result) {
  std::string out = "shots  proposed_f1  ablation_f1  gain\n";
  char line[96];
  for (const auto& s : result.proposed.shots) {
    const ShotResult* a = result.ablation.at(s.shots);
    const double af1 = a ? a->mean_f1 : 0.0;
    std::snprintf(line, sizeof(line), "%5d  %11.4f  %11.4f  %+.4f\n", s.shots, s.mean_f1, af1, s.mean_f1 - af1);
    out += line;
  }
  return out;
}

}  // namespace fsed::cli
