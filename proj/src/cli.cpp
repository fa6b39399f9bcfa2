// Copyright 2026  aqassess authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "aqassess/cli/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqassess/cam/cam.hpp"
#include "aqassess/corpus/corpus.hpp"
#include "aqassess/dsp/normalize.hpp"
#include "aqassess/error.hpp"
#include "aqassess/eval/pipeline.hpp"
#include "aqassess/models/build.hpp"
#include "aqassess/train/train.hpp"

namespace aqassess::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- run records and locking ----------------------------------------------

/// `key = value` lines; blank lines and lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path.string() + ":" + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    out.emplace_back(key, value);
  }
  return out;
}

/// Resolved value and origin of every option of one subcommand.
class RunRecord {
 public:
  RunRecord(CLI::App& sub, const std::optional<fs::path>& config) : command_(sub.get_name()) {
    std::map<std::string, std::string> from_config;
    if (config) {
      for (auto& [key, value] : read_config(*config)) {
        if (key == "config") throw UsageError("config files cannot include other config files");
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (!opt) throw UsageError("unknown key '" + key + "' in " + config->string() + " for `" + command_ + "`");
        if (opt->count() == 0) from_config[key] = value;
      }
    }
    for (CLI::Option* opt : sub.get_options()) {
      if (opt->get_lnames().empty()) continue;
      const std::string key = opt->get_lnames().front();
      if (key == "help" || key == "config") continue;
      Entry e;
      if (opt->count() > 0) {
        e.source = "flag";
      } else if (auto it = from_config.find(key); it != from_config.end()) {
        opt->add_result(it->second);
        opt->run_callback();
        e.source = "config";
      } else {
        e.source = "default";
      }
      if (opt->count() > 0) {
        const auto& r = opt->results();
        for (std::size_t i = 0; i < r.size(); ++i) e.value += (i ? "," : "") + r[i];
      } else {
        e.value = opt->get_default_str();
      }
      entries_[key] = e;
    }
    if (config) config_ = config->string();
  }

  const std::string& source(const std::string& key) const { return entries_.at(key).source; }
  bool given(const std::string& key) const { return source(key) != "default"; }

  void require_all(std::initializer_list<const char*> keys) const {
    for (const char* key : keys)
      if (!given(key)) throw UsageError(std::string("--") + key + " is required for `" + command_ + "`");
  }

  /// Values worked out after parsing, e.g. a learning rate chosen per model.
  void resolve(const std::string& key, json value) { resolved_[key] = std::move(value); }

  void write(const fs::path& dir) const {
    json opts = json::object();
    for (const auto& [k, e] : entries_) opts[k] = {{"value", e.value}, {"source", e.source}};
    json j = {{"command", command_}, {"options", opts}};
    if (config_) j["config_file"] = *config_;
    if (!resolved_.empty()) j["resolved"] = resolved_;
    std::ofstream os(dir / "run_config.json");
    if (!os) throw DataError("cannot write " + (dir / "run_config.json").string());
    os << j.dump(2) << "\n";
  }

 private:
  struct Entry {
    std::string value, source;
  };
  std::string command_;
  std::map<std::string, Entry> entries_;
  std::optional<std::string> config_;
  json resolved_ = json::object();
};

/// Exclusive `.lock` file in an output directory, removed on destruction.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST)
        throw DataError("output directory " + dir.string() + " is in use by another run (remove " +
                        path_.string() + " if no run is active)");
      throw DataError("cannot create " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

void require_file(const fs::path& p, const std::string& what, const std::string& producer) {
  if (!fs::exists(p)) throw DataError("missing " + what + " " + p.string() + " (run `" + producer + "` first)");
}

fs::path folds_file(const fs::path& p) { return fs::is_directory(p) ? p / "folds.json" : p; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw DataError("cannot write " + path.string());
}

std::string fmt3(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3f", v);
  return b;
}

// ---- commands ------------------------------------------------------------

struct SynthArgs {
  std::size_t n_speakers = 40;
  std::uint64_t seed = 0;
  double recording_seconds = 21.0;
  std::size_t recordings = 3;
  fs::path out;
};

void cmd_synth(const SynthArgs& a, RunRecord& rec) {
  rec.require_all({"seed", "out"});
  if (a.n_speakers < 2) throw UsageError("--n-speakers must be at least 2");
  DirLock lock(a.out);
  corpus::SynthProfile profile;
  profile.recording_seconds = a.recording_seconds;
  profile.recordings_per_speaker = a.recordings;
  const auto speakers = corpus::synth_corpus(a.n_speakers, profile, a.seed, a.out);
  rec.write(a.out);
  std::cerr << "wrote " << speakers.size() << " speakers to " << (a.out / "manifest.jsonl").string() << "\n";
}

struct FoldsArgs {
  fs::path manifest, out;
  std::size_t k = 5;
  double valid_frac = 0.1;
  double aq_threshold = corpus::kDefaultAqThreshold;
  std::uint64_t seed = 0;
};

void cmd_folds(const FoldsArgs& a, RunRecord& rec) {
  rec.require_all({"manifest", "seed", "out"});
  require_file(a.manifest, "manifest", "synth");
  const auto speakers = corpus::load_manifest(a.manifest);
  DirLock lock(a.out);
  const auto plan = corpus::make_folds(speakers, a.k, a.valid_frac, a.seed, a.aq_threshold);
  corpus::save_fold_plan(a.out / "folds.json", plan);
  rec.write(a.out);
  std::cerr << "wrote " << plan.folds.size() << " folds over " << speakers.size() << " speakers to "
            << (a.out / "folds.json").string() << "\n";
}

struct FeaturesArgs {
  fs::path manifest, out;
  std::string kind = "logmel";
  std::string segmentation = "fixed3s";
  double aq_threshold = corpus::kDefaultAqThreshold;
};

void cmd_features(const FeaturesArgs& a, RunRecord& rec) {
  rec.require_all({"manifest", "out"});
  require_file(a.manifest, "manifest", "synth");
  const auto kind = dsp::parse_feature_kind(a.kind);
  const auto seg = corpus::parse_segmentation(a.segmentation);
  std::vector<corpus::ManifestIssue> issues;
  const auto speakers = corpus::load_manifest(a.manifest, &issues);
  for (const auto& i : issues) std::cerr << a.manifest.string() << ":" << i.line << ": " << i.message << "\n";
  DirLock lock(a.out);
  const auto ds = eval::extract_dataset(speakers, kind, seg, {}, a.aq_threshold);
  if (ds.items.empty()) throw DataError("no utterances extracted from " + a.manifest.string());
  eval::save_dataset(a.out, ds);
  rec.write(a.out);
  std::size_t lo = ds.items.front().features.frames(), hi = lo;
  for (const auto& u : ds.items) {
    lo = std::min(lo, u.features.frames());
    hi = std::max(hi, u.features.frames());
  }
  std::cerr << "wrote " << ds.items.size() << " utterances, frames " << lo;
  if (hi != lo) std::cerr << ".." << hi;
  std::cerr << " x " << ds.items.front().features.dims() << " dims, to " << a.out.string() << "\n";
}

struct TrainArgs {
  fs::path features, folds, out;
  std::string model = "cnn";
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;
  double lr = 0;  // per model kind when not given
  double weight_decay = 5e-4;
  std::size_t max_epochs = 50;
  std::size_t patience = 8;
  double width_scale = 1.0;
  std::size_t gru_hidden = 200;
  std::size_t topic_hidden = 256;
};

models::ModelSpec model_spec(const TrainArgs& a, const eval::Dataset& ds) {
  models::ModelSpec spec;
  spec.kind = models::parse_model_kind(a.model);
  if (!(a.width_scale > 0)) throw UsageError("--width-scale must be positive");
  spec.scale_channels(a.width_scale);
  spec.gru_hidden = a.gru_hidden;
  spec.topic_hidden = a.topic_hidden;
  spec.input_bins = ds.items.empty() ? spec.input_bins : ds.items.front().features.dims();
  return spec;
}

void cmd_train(const TrainArgs& a, RunRecord& rec) {
  rec.require_all({"features", "folds", "seed", "out"});
  const auto kind = models::parse_model_kind(a.model);
  require_file(a.features / "index.jsonl", "feature index", "features");
  const auto plan_path = folds_file(a.folds);
  require_file(plan_path, "fold plan", "folds");
  const auto ds = eval::load_dataset(a.features);
  if (models::is_cnn(kind) && ds.segmentation != corpus::Segmentation::fixed3s)
    throw UsageError("cnn requires fixed3s");
  const auto plan = corpus::load_fold_plan(plan_path);

  train::HyperParams hp = train::HyperParams::for_model(kind, a.seed);
  hp.batch_size = a.batch_size;
  if (rec.given("lr")) hp.lr = a.lr;
  hp.weight_decay = a.weight_decay;
  hp.max_epochs = a.max_epochs;
  hp.patience = a.patience;
  hp.validate();
  const auto spec = model_spec(a, ds);

  DirLock lock(a.out);
  rec.resolve("hyper_params", json::parse(train::to_json(hp)));
  rec.resolve("model", json::parse(models::spec_to_json(spec)));
  rec.write(a.out);
  eval::CvOptions opt;
  opt.out_dir = a.out;
  opt.on_epoch = [](std::size_t fold, const train::EpochRecord& r) {
    std::fprintf(stderr, "fold %zu  epoch %zu  train_loss %.4f  valid_loss %.4f  valid_auc %.4f\n", fold,
                 r.epoch, r.train_loss, r.valid_loss, r.valid_auc);
  };
  const auto report = eval::cross_validate(ds, plan, spec, hp, opt);
  std::fprintf(stderr, "trained %zu folds; pooled test auc %.4f, speaker accuracy %.3f\n",
               plan.folds.size(), report.pooled_auc, report.metrics.accuracy);
}

struct EvalArgs {
  fs::path features, folds, checkpoints, out;
  std::string model = "cnn";
};

void cmd_eval(const EvalArgs& a, RunRecord& rec) {
  rec.require_all({"features", "folds", "checkpoints", "out"});
  const auto kind = models::parse_model_kind(a.model);
  require_file(a.features / "index.jsonl", "feature index", "features");
  const auto plan_path = folds_file(a.folds);
  require_file(plan_path, "fold plan", "folds");
  if (!fs::is_directory(a.checkpoints))
    throw DataError("missing checkpoint directory " + a.checkpoints.string() + " (run `train` first)");
  const auto ds = eval::load_dataset(a.features);
  const auto plan = corpus::load_fold_plan(plan_path);
  const auto report = eval::evaluate_checkpoints(ds, plan, a.checkpoints, kind);
  DirLock lock(a.out);
  write_text(a.out / "report.txt", report.to_text());
  write_text(a.out / "report.jsonl", report.to_jsonl());
  rec.write(a.out);
  std::cout << report.to_text();
}

struct CamArgs {
  fs::path checkpoint, features, out;
  std::vector<std::string> utterances;
  std::string segment;
  std::string layer = cam::kDefaultLayer;
  double alpha = 0.4;
  std::size_t panels = 5;
};

void cmd_cam(const CamArgs& a, RunRecord& rec) {
  rec.require_all({"checkpoint", "features", "out"});
  if (a.utterances.empty() && a.segment.empty()) throw UsageError("give --utterance or --segment");
  if (!(a.alpha >= 0 && a.alpha <= 1)) throw UsageError("--alpha must be in [0, 1]");
  require_file(a.checkpoint, "checkpoint", "train");
  require_file(a.features / "index.jsonl", "feature index", "features");
  auto ck = models::load_checkpoint(a.checkpoint);
  if (!models::is_cnn(ck.model->kind())) throw UsageError("cam needs a CNN checkpoint");
  const json meta = json::parse(ck.metadata);
  const auto ds = eval::load_dataset(a.features);
  if (!meta.contains("features") || !meta.contains("norm"))
    throw DataError(a.checkpoint.string() + " carries no feature settings or normalisation");
  const auto& feat = meta.at("features");
  if (feat.at("kind").get<std::string>() != dsp::to_string(ds.kind) ||
      feat.at("segmentation").get<std::string>() != corpus::to_string(ds.segmentation))
    throw DataError(a.checkpoint.string() + " was trained on " + feat.at("kind").get<std::string>() + "/" +
                    feat.at("segmentation").get<std::string>() + " features");
  const auto norm = dsp::norm_from_json(meta.at("norm").dump());
  auto dm = cam::to_double(*ck.model);

  std::map<std::string, const eval::UtteranceFeatures*> by_id;
  for (const auto& u : ds.items) by_id[u.id] = &u;
  std::vector<const eval::UtteranceFeatures*> targets;
  for (const auto& id : a.utterances) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("utterance " + id + " not in " + a.features.string());
    targets.push_back(it->second);
  }
  std::vector<const eval::UtteranceFeatures*> panel_items;
  if (!a.segment.empty()) {
    const std::string prefix = a.segment + "-";
    for (const auto& u : ds.items)
      if (u.id.compare(0, prefix.size(), prefix) == 0 && panel_items.size() < a.panels) panel_items.push_back(&u);
    if (panel_items.empty()) throw DataError("no utterances of segment " + a.segment + " in " + a.features.string());
    for (const auto* u : panel_items)
      if (std::find(targets.begin(), targets.end(), u) == targets.end()) targets.push_back(u);
  }

  struct Rendered {
    dsp::Matrix pos, neg;
    double score;
  };
  std::map<const eval::UtteranceFeatures*, Rendered> maps;
  DirLock lock(a.out);
  for (const auto* u : targets) {
    const auto x = dsp::apply_norm(u->features, norm);
    const auto pair = cam::grad_cam_pair(*dm, x, a.layer, u->topic_id);
    Rendered r;
    r.pos = cam::upsample(pair.positive.values, x.frames(), x.dims());
    r.neg = cam::upsample(pair.negative.values, x.frames(), x.dims());
    r.score = models::score_utterance(*ck.model, x, u->topic_id);
    const auto range = cam::joint_range(r.pos, r.neg);
    const dsp::Matrix zero(x.frames(), x.dims());
    const std::string stem = u->id + "." + a.layer + ".";
    cam::write_ppm(a.out / (stem + "positive.ppm"),
                   cam::render_overlay(u->features.values, r.pos, zero, a.alpha, range));
    cam::write_ppm(a.out / (stem + "negative.ppm"),
                   cam::render_overlay(u->features.values, zero, r.neg, a.alpha, range));
    maps.emplace(u, std::move(r));
  }

  if (!panel_items.empty()) {
    cam::MapRange range{0, 0};
    bool first = true;
    for (const auto* u : panel_items) {
      const auto r = cam::joint_range(maps.at(u).pos, maps.at(u).neg);
      range = first ? r : cam::MapRange{std::min(range.lo, r.lo), std::max(range.hi, r.hi)};
      first = false;
    }
    std::vector<cam::OverlayImage> panels;
    std::string caption = "segment " + a.segment + "  layer " + a.layer + "\npanel  utterance  score\n";
    double sum = 0;
    for (std::size_t i = 0; i < panel_items.size(); ++i) {
      const auto* u = panel_items[i];
      const auto& r = maps.at(u);
      panels.push_back(cam::render_overlay(u->features.values, r.pos, r.neg, a.alpha, range));
      caption += std::to_string(i + 1) + "  " + u->id + "  " + fmt3(r.score) + "\n";
      sum += r.score;
    }
    caption += "mean " + fmt3(sum / static_cast<double>(panel_items.size())) + "\n";
    cam::write_ppm(a.out / (a.segment + ".panel.ppm"), cam::concat_horizontal(panels));
    write_text(a.out / (a.segment + ".panel.txt"), caption);
  }
  rec.write(a.out);
  std::cerr << "wrote maps for " << targets.size() << " utterances to " << a.out.string() << "\n";
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Aphasia severity assessment from speech: corpus, features, training, evaluation and CAM"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", "aqassess 0.1.0");

  std::optional<fs::path> config;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Flat key = value file; flags override it")->check(CLI::ExistingFile);
  };
  const auto kinds = CLI::IsMember({"cnn", "cnn_topic", "gru", "gru_topic"});

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus (audio and manifest)");
  synth->add_option("--n-speakers", sa.n_speakers, "Number of speakers");
  synth->add_option("--seed", sa.seed, "Generator seed (required)");
  synth->add_option("--recording-seconds", sa.recording_seconds, "Length of each recording");
  synth->add_option("--recordings", sa.recordings, "Recordings per speaker");
  synth->add_option("--out", sa.out, "Output directory");
  add_config(synth);

  FoldsArgs fa;
  auto* folds = app.add_subcommand("folds", "Write a speaker-level cross-validation plan");
  folds->add_option("--manifest", fa.manifest, "Corpus manifest");
  folds->add_option("--k", fa.k, "Number of folds");
  folds->add_option("--valid-frac", fa.valid_frac, "Share of training speakers held out for validation");
  folds->add_option("--aq-threshold", fa.aq_threshold, "AQ at or above which a speaker is High-AQ");
  folds->add_option("--seed", fa.seed, "Shuffle seed (required)");
  folds->add_option("--out", fa.out, "Output directory (receives folds.json)");
  add_config(folds);

  FeaturesArgs xa;
  auto* features = app.add_subcommand("features", "Segment the corpus and extract features");
  features->add_option("--manifest", xa.manifest, "Corpus manifest");
  features->add_option("--kind", xa.kind, "Feature kind")->check(CLI::IsMember({"logmel", "mfcc"}));
  features->add_option("--segmentation", xa.segmentation, "Segmentation")
      ->check(CLI::IsMember({"manual", "fixed3s"}));
  features->add_option("--aq-threshold", xa.aq_threshold, "AQ at or above which a speaker is High-AQ");
  features->add_option("--out", xa.out, "Feature cache directory");
  add_config(features);

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Train one model per fold and select epochs on validation AUC");
  trn->add_option("--features", ta.features, "Feature cache directory");
  trn->add_option("--folds", ta.folds, "Fold plan (folds.json or its directory)");
  trn->add_option("--model", ta.model, "Model kind")->check(kinds);
  trn->add_option("--seed", ta.seed, "Training seed (required)");
  trn->add_option("--batch-size", ta.batch_size, "Mini-batch size");
  trn->add_option("--lr", ta.lr, "Adam learning rate (default 1e-3 for cnn kinds, 1e-4 for gru kinds)")
      ->default_str("");
  trn->add_option("--weight-decay", ta.weight_decay, "Weight decay");
  trn->add_option("--max-epochs", ta.max_epochs, "Epoch limit");
  trn->add_option("--patience", ta.patience, "Epochs without a better validation AUC before stopping");
  trn->add_option("--width-scale", ta.width_scale, "Factor on every conv width");
  trn->add_option("--gru-hidden", ta.gru_hidden, "GRU hidden units per layer");
  trn->add_option("--topic-hidden", ta.topic_hidden, "Hidden units of the topic fusion layers");
  trn->add_option("--out", ta.out, "Checkpoint directory");
  add_config(trn);

  EvalArgs ea;
  auto* evl = app.add_subcommand("eval", "Score test speakers from fold checkpoints and write the report");
  evl->add_option("--features", ea.features, "Feature cache directory");
  evl->add_option("--folds", ea.folds, "Fold plan (folds.json or its directory)");
  evl->add_option("--model", ea.model, "Model kind")->check(kinds);
  evl->add_option("--checkpoints", ea.checkpoints, "Checkpoint directory written by train");
  evl->add_option("--out", ea.out, "Report directory");
  add_config(evl);

  CamArgs ca;
  auto* cm = app.add_subcommand("cam", "Render Grad-CAM overlays for utterances or a segment");
  cm->add_option("--checkpoint", ca.checkpoint, "CNN checkpoint");
  cm->add_option("--features", ca.features, "Feature cache directory");
  cm->add_option("--utterance", ca.utterances, "Utterance id (repeatable)");
  cm->add_option("--segment", ca.segment, "Recording id {speaker}-r{n}; its first windows form a panel figure");
  cm->add_option("--panels", ca.panels, "Windows per panel figure");
  cm->add_option("--layer", ca.layer, "Tapped layer")
      ->check(CLI::IsMember({"layer1", "layer3", "layer5", "layer6", "layer7", "layer8"}));
  cm->add_option("--alpha", ca.alpha, "Overlay opacity");
  cm->add_option("--out", ca.out, "Image directory");
  add_config(cm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth->parsed()) {
      RunRecord rec(*synth, config);
      cmd_synth(sa, rec);
    } else if (folds->parsed()) {
      RunRecord rec(*folds, config);
      cmd_folds(fa, rec);
    } else if (features->parsed()) {
      RunRecord rec(*features, config);
      cmd_features(xa, rec);
    } else if (trn->parsed()) {
      RunRecord rec(*trn, config);
      cmd_train(ta, rec);
    } else if (evl->parsed()) {
      RunRecord rec(*evl, config);
      cmd_eval(ea, rec);
    } else if (cm->parsed()) {
      RunRecord rec(*cm, config);
      cmd_cam(ca, rec);
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (auto& s : copy) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(copy.size()), argv.data());
}

}  // namespace aqassess::cli
