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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "aqassess/dsp/feature_cache.hpp"
#include "aqassess/error.hpp"
#include "aqassess/eval/pipeline.hpp"
#include "aqassess/rng.hpp"
#include "json.hpp"

namespace aqassess::eval {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

json nan_to_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json frame_spec_json(const dsp::FrameSpec& s) {
  return {{"window_ms", s.window_ms}, {"hop_ms", s.hop_ms}, {"n_fft", s.n_fft},
          {"n_mels", s.n_mels}, {"sample_rate", s.sample_rate}};
}

}  // namespace

Dataset extract_dataset(const std::vector<corpus::SpeakerRecord>& speakers, dsp::FeatureKind kind,
                        corpus::Segmentation segmentation, const dsp::FrameSpec& spec,
                        double aq_threshold) {
  Dataset ds;
  ds.kind = kind;
  ds.segmentation = segmentation;
  for (const auto& spk : speakers)
    for (std::size_t r = 0; r < spk.recordings.size(); ++r) {
      if (spk.recordings[r].missing) continue;
      const auto audio = corpus::load_audio(spk.recordings[r].path);
      const auto utts = segmentation == corpus::Segmentation::manual
                            ? corpus::segment_manual(spk, r, audio, aq_threshold)
                            : corpus::segment_fixed(spk, r, audio, 3.0, aq_threshold);
      for (const auto& u : utts) {
        UtteranceFeatures f;
        f.id = u.id;
        f.speaker_id = u.speaker_id;
        f.topic_id = u.topic_id;
        f.label = u.label;
        f.features = kind == dsp::FeatureKind::logmel128 ? dsp::log_mel(u.samples, spec)
                                                         : dsp::mfcc(u.samples, spec);
        ds.items.push_back(std::move(f));
      }
    }
  if (ds.items.empty()) throw DataError("extract_dataset: corpus yielded no utterances");
  return ds;
}

void save_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir / "feats");
  std::ofstream idx(dir / "index.jsonl");
  if (!idx) throw DataError("cannot write " + (dir / "index.jsonl").string());
  const auto& fs = ds.items.empty() ? dsp::FrameSpec{} : ds.items.front().features.frame_spec;
  idx << json{{"kind", dsp::to_string(ds.kind)},
              {"segmentation", corpus::to_string(ds.segmentation)},
              {"frame_spec", frame_spec_json(fs)},
              {"count", ds.items.size()}}
             .dump()
      << "\n";
  for (const auto& it : ds.items) {
    const std::string file = "feats/" + it.id + ".aqfx";
    dsp::save_features(dir / file, it.features);
    idx << json{{"id", it.id}, {"speaker_id", it.speaker_id}, {"topic_id", it.topic_id},
                {"label", it.label}, {"frames", it.features.frames()}, {"file", file}}
               .dump()
        << "\n";
  }
  if (!idx) throw DataError("write failed: " + (dir / "index.jsonl").string());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "index.jsonl";
  std::ifstream is(path);
  if (!is) throw DataError("missing feature index " + path.string() + " (run `features` first)");
  std::string line;
  std::size_t lineno = 0;
  Dataset ds;
  std::size_t expected = 0;
  try {
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (lineno == 1) {
        ds.kind = dsp::parse_feature_kind(j.at("kind").get<std::string>());
        ds.segmentation = corpus::parse_segmentation(j.at("segmentation").get<std::string>());
        expected = j.at("count").get<std::size_t>();
        continue;
      }
      UtteranceFeatures f;
      f.id = j.at("id").get<std::string>();
      f.speaker_id = j.at("speaker_id").get<std::string>();
      f.topic_id = j.at("topic_id").get<int>();
      f.label = j.at("label").get<int>();
      f.features = dsp::load_features(dir / j.at("file").get<std::string>());
      if (f.features.kind != ds.kind) throw DataError(f.id + ": feature kind differs from the index");
      ds.items.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
  }
  if (ds.items.size() != expected)
    throw DataError(path.string() + ": index lists " + std::to_string(ds.items.size()) +
                    " utterances, header says " + std::to_string(expected));
  return ds;
}

std::vector<const UtteranceFeatures*> select(const Dataset& ds, const std::vector<std::string>& ids) {
  const std::set<std::string> want(ids.begin(), ids.end());
  std::vector<const UtteranceFeatures*> out;
  for (const auto& it : ds.items)
    if (want.count(it.speaker_id)) out.push_back(&it);
  return out;
}

FoldData prepare_fold(const Dataset& ds, const corpus::Fold& fold, std::size_t fold_index) {
  const auto tr = select(ds, fold.train), va = select(ds, fold.valid), te = select(ds, fold.test);
  if (tr.empty()) throw DataError("fold " + std::to_string(fold_index) + ": no training utterances");
  FoldData fd;
  std::vector<const dsp::FeatureMatrix*> fit;
  for (const auto* u : tr) fit.push_back(&u->features);
  fd.norm = dsp::fit_norm(std::span<const dsp::FeatureMatrix* const>(fit), static_cast<int>(fold_index));
  fd.features.reserve(tr.size() + va.size() + te.size());
  auto build = [&](const std::vector<const UtteranceFeatures*>& src, std::vector<train::Example>& dst) {
    for (const auto* u : src) {
      fd.features.push_back(dsp::apply_norm(u->features, fd.norm));
      dst.push_back({&fd.features.back(), u->topic_id, u->label, u->speaker_id, u->id});
    }
  };
  build(tr, fd.train);
  build(va, fd.valid);
  build(te, fd.test);
  return fd;
}

std::string checkpoint_name(std::size_t fold, models::ModelKind kind) {
  return "fold" + std::to_string(fold) + "-" + models::to_string(kind) + ".ckpt";
}

std::string log_name(std::size_t fold, models::ModelKind kind) {
  return "fold" + std::to_string(fold) + "-" + models::to_string(kind) + ".log.jsonl";
}

CvReport assemble_report(std::vector<ScoreEntry> scores, std::size_t k) {
  if (scores.empty()) throw DataError("report: no test scores");
  CvReport r;
  r.fold_auc.assign(k, std::nan(""));
  for (std::size_t f = 1; f <= k; ++f) {
    std::vector<double> s;
    std::vector<int> l;
    for (const auto& e : scores)
      if (e.fold == f) {
        s.push_back(e.score);
        l.push_back(e.label);
      }
    const bool both = std::count(l.begin(), l.end(), 1) > 0 && std::count(l.begin(), l.end(), 0) > 0;
    if (both) r.fold_auc[f - 1] = auc(s, l);
  }
  std::vector<double> all;
  std::vector<int> labels;
  for (const auto& e : scores) {
    all.push_back(e.score);
    labels.push_back(e.label);
  }
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                    std::count(labels.begin(), labels.end(), 0) > 0;
  r.pooled_auc = both ? auc(all, labels) : std::nan("");

  std::map<std::string, std::vector<const ScoreEntry*>> by_speaker;
  for (const auto& e : scores) by_speaker[e.speaker_id].push_back(&e);
  for (const auto& [id, entries] : by_speaker) {
    std::vector<double> s;
    for (const auto* e : entries) s.push_back(e->score);
    SpeakerResult sr;
    sr.speaker_id = id;
    sr.label = entries.front()->label;
    sr.fold = entries.front()->fold;
    sr.utterances = entries.size();
    sr.overall = fuse_speaker(s);
    sr.decision = classify_speaker(sr.overall);
    r.confusion.add(sr.label, sr.decision);
    r.speakers.push_back(sr);
  }
  r.metrics = metrics(r.confusion);
  r.scores = std::move(scores);
  return r;
}

std::string CvReport::to_text() const {
  std::string o;
  char buf[256];
  o += "cross-validation report\n";
  std::snprintf(buf, sizeof buf, "model %s  features %s  segmentation %s  seed %llu  folds %zu\n\n",
                model_kind.c_str(), feature_kind.c_str(), segmentation.c_str(),
                static_cast<unsigned long long>(seed), fold_auc.size());
  o += buf;
  o += "fold  utterances  auc\n";
  for (std::size_t f = 0; f < fold_auc.size(); ++f) {
    const auto n = std::count_if(scores.begin(), scores.end(),
                                 [&](const ScoreEntry& e) { return e.fold == f + 1; });
    std::snprintf(buf, sizeof buf, "%-4zu  %-10zu  %s\n", f + 1, static_cast<std::size_t>(n),
                  fmt("%.4f", fold_auc[f]).c_str());
    o += buf;
  }
  o += "pooled utterance auc " + fmt("%.4f", pooled_auc) + "\n\n";
  o += "speaker  label    fold  utterances  overall  decision\n";
  for (const auto& s : speakers) {
    std::snprintf(buf, sizeof buf, "%-7s  %-7s  %-4zu  %-10zu  %.3f    %s\n", s.speaker_id.c_str(),
                  s.label ? "High-AQ" : "Low-AQ", s.fold, s.utterances, s.overall,
                  to_string(s.decision).c_str());
    o += buf;
  }
  o += "\nconfusion matrix (positive = High-AQ)\n";
  std::snprintf(buf, sizeof buf,
                "                pred High-AQ  pred Low-AQ\n"
                "true High-AQ    %-12zu  %zu\n"
                "true Low-AQ     %-12zu  %zu\n\n",
                confusion.tp, confusion.fn, confusion.fp, confusion.tn);
  o += buf;
  o += "accuracy " + fmt("%.3f", metrics.accuracy) + "  macro-F1 " + fmt("%.3f", metrics.macro_f1) +
       "  recall " + fmt("%.3f", metrics.recall) + "  specificity " +
       fmt("%.3f", metrics.specificity) + "\n";
  return o;
}

std::string CvReport::to_jsonl() const {
  std::string o;
  o += json{{"type", "config"}, {"model", model_kind}, {"features", feature_kind},
            {"segmentation", segmentation}, {"seed", seed}, {"folds", fold_auc.size()}}
           .dump() +
       "\n";
  for (std::size_t f = 0; f < fold_auc.size(); ++f)
    o += json{{"type", "fold"}, {"fold", f + 1}, {"auc", nan_to_null(fold_auc[f])}}.dump() + "\n";
  o += json{{"type", "pooled"}, {"auc", nan_to_null(pooled_auc)}}.dump() + "\n";
  for (const auto& e : scores)
    o += json{{"type", "utterance"}, {"id", e.utterance_id}, {"speaker_id", e.speaker_id},
              {"fold", e.fold}, {"label", e.label}, {"score", e.score}}
             .dump() +
         "\n";
  for (const auto& s : speakers)
    o += json{{"type", "speaker"}, {"speaker_id", s.speaker_id}, {"label", s.label},
              {"fold", s.fold}, {"utterances", s.utterances}, {"overall", s.overall},
              {"decision", to_string(s.decision)}}
             .dump() +
         "\n";
  o += json{{"type", "confusion"}, {"tp", confusion.tp}, {"fn", confusion.fn},
            {"fp", confusion.fp}, {"tn", confusion.tn}}
           .dump() +
       "\n";
  o += json{{"type", "metrics"}, {"accuracy", nan_to_null(metrics.accuracy)},
            {"macro_f1", nan_to_null(metrics.macro_f1)}, {"recall", nan_to_null(metrics.recall)},
            {"specificity", nan_to_null(metrics.specificity)}}
           .dump() +
       "\n";
  return o;
}

namespace {

json fold_fingerprint(const corpus::FoldPlan& plan, std::size_t f) {
  return {{"index", f}, {"seed", plan.seed}, {"test", plan.folds[f - 1].test}};
}

void append_scores(models::Model<float>& model, const FoldData& fd, std::size_t f,
                   std::vector<ScoreEntry>& out) {
  if (fd.test.empty()) return;
  const auto ev = train::evaluate(model, fd.test);
  for (std::size_t i = 0; i < fd.test.size(); ++i)
    out.push_back({fd.test[i].utterance_id, fd.test[i].speaker_id, ev.scores[i], fd.test[i].label, f});
}

CvReport finish(std::vector<ScoreEntry> scores, const Dataset& ds, const corpus::FoldPlan& plan,
                models::ModelKind kind, std::uint64_t seed) {
  CvReport r = assemble_report(std::move(scores), plan.folds.size());
  r.model_kind = models::to_string(kind);
  r.feature_kind = dsp::to_string(ds.kind);
  r.segmentation = corpus::to_string(ds.segmentation);
  r.seed = seed;
  return r;
}

void check_config(const models::ModelSpec& spec, const Dataset& ds) {
  const std::size_t dims = ds.items.empty() ? 0 : ds.items.front().features.dims();
  if (models::is_cnn(spec.kind) && ds.segmentation != corpus::Segmentation::fixed3s)
    throw UsageError("cnn requires fixed3s");
  if (dims != spec.input_bins)
    throw DataError("features have " + std::to_string(dims) + " dims, model expects " +
                    std::to_string(spec.input_bins));
}

}  // namespace

CvReport cross_validate(const Dataset& ds, const corpus::FoldPlan& plan,
                        const models::ModelSpec& spec, const train::HyperParams& hp,
                        const CvOptions& options) {
  check_config(spec, ds);
  if (options.out_dir) std::filesystem::create_directories(*options.out_dir);
  std::vector<ScoreEntry> scores;
  for (std::size_t f = 1; f <= plan.folds.size(); ++f) {
    const FoldData fd = prepare_fold(ds, plan.folds[f - 1], f);
    train::HyperParams fold_hp = hp;
    fold_hp.seed = derive_seed(hp.seed, f);
    auto model = models::build_model<float>(spec, derive_seed(fold_hp.seed, 0));
    train::TrainOptions to;
    json meta = {{"features", {{"kind", dsp::to_string(ds.kind)},
                               {"segmentation", corpus::to_string(ds.segmentation)}}},
                 {"norm", json::parse(dsp::to_json(fd.norm))},
                 {"fold", fold_fingerprint(plan, f)},
                 {"seed", hp.seed}};
    to.metadata = meta.dump();
    if (options.out_dir) {
      to.checkpoint = *options.out_dir / checkpoint_name(f, spec.kind);
      to.log = *options.out_dir / log_name(f, spec.kind);
    }
    if (options.on_epoch) to.on_epoch = [&, f](const train::EpochRecord& r) { options.on_epoch(f, r); };
    train::train_fold(*model, plan.folds[f - 1], fd.train, fd.valid, fold_hp, to);
    append_scores(*model, fd, f, scores);
  }
  return finish(std::move(scores), ds, plan, spec.kind, hp.seed);
}

CvReport evaluate_checkpoints(const Dataset& ds, const corpus::FoldPlan& plan,
                              const std::filesystem::path& dir, models::ModelKind kind) {
  std::vector<ScoreEntry> scores;
  std::uint64_t seed = 0;
  for (std::size_t f = 1; f <= plan.folds.size(); ++f) {
    const auto path = dir / checkpoint_name(f, kind);
    if (!std::filesystem::exists(path))
      throw DataError("missing checkpoint " + path.string() + " (run `train` first)");
    auto ck = models::load_checkpoint(path);
    const json meta = json::parse(ck.metadata);
    const auto& feat = meta.at("features");
    if (feat.at("kind").get<std::string>() != dsp::to_string(ds.kind) ||
        feat.at("segmentation").get<std::string>() != corpus::to_string(ds.segmentation))
      throw DataError(path.string() + " was trained on " + feat.at("kind").get<std::string>() + "/" +
                      feat.at("segmentation").get<std::string>() + " features, not " +
                      dsp::to_string(ds.kind) + "/" + corpus::to_string(ds.segmentation));
    if (meta.at("fold") != fold_fingerprint(plan, f))
      throw DataError(path.string() + " was trained on a different fold plan");
    check_config(ck.model->spec(), ds);
    seed = meta.at("seed").get<std::uint64_t>();

    // Rebuild the test examples with the stored training statistics.
    const auto norm = dsp::norm_from_json(meta.at("norm").dump());
    FoldData fd;
    const auto te = select(ds, plan.folds[f - 1].test);
    fd.features.reserve(te.size());
    for (const auto* u : te) {
      fd.features.push_back(dsp::apply_norm(u->features, norm));
      fd.test.push_back({&fd.features.back(), u->topic_id, u->label, u->speaker_id, u->id});
    }
    append_scores(*ck.model, fd, f, scores);
  }
  return finish(std::move(scores), ds, plan, kind, seed);
}

}  // namespace aqassess::eval
