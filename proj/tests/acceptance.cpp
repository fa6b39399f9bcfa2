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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Criteria can be selected by number: `acceptance 1 4 9`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "aqassess/cam/cam.hpp"
#include "aqassess/cli/cli.hpp"
#include "aqassess/corpus/corpus.hpp"
#include "aqassess/dsp/features.hpp"
#include "aqassess/engine/adam.hpp"
#include "aqassess/engine/gru.hpp"
#include "aqassess/engine/layers.hpp"
#include "aqassess/engine/loss.hpp"
#include "aqassess/eval/metrics.hpp"
#include "aqassess/eval/pipeline.hpp"
#include "aqassess/models/build.hpp"
#include "test_util.hpp"

using namespace aqassess;
using aqassess::testing::check_model;
using aqassess::testing::check_op;
using aqassess::testing::random_away_from_zero;
using aqassess::testing::random_features;
using aqassess::testing::random_tensor;
using aqassess::testing::TempDir;
using engine::Tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// ---- 1 ---------------------------------------------------------------------

Outcome gradient_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  auto record = [&](const char* name, double err) {
    worst = std::max(worst, err);
    o.require(err < 1e-4, std::string(name) + " rel err " + fmt("%.2e", err));
  };
  Rng rng(2024);

  {
    engine::Conv2d<double> conv(2, 3);
    conv.init(rng);
    for (auto& v : conv.bias().value.vec()) v = rng.normal();
    auto x = random_tensor({2, 2, 6, 5}, rng);
    record("conv2d", check_op(
                         x, [&](const Tensor<double>& in) { return conv.forward(in); },
                         [&](const Tensor<double>& dy) { return conv.backward(dy); },
                         {{&conv.weight().value, &conv.weight().grad}, {&conv.bias().value, &conv.bias().grad}},
                         rng));
  }
  {
    engine::MaxPool2d<double> pool;
    auto x = random_tensor({2, 2, 7, 9}, rng);
    record("maxpool", check_op(
                          x, [&](const Tensor<double>& in) { return pool.forward(in); },
                          [&](const Tensor<double>& dy) { return pool.backward(dy); }, {}, rng));
  }
  {
    engine::BatchNorm2d<double> bn(3);
    for (auto& v : bn.gamma().value.vec()) v = 1.0 + 0.3 * rng.normal();
    for (auto& v : bn.beta().value.vec()) v = rng.normal();
    auto x = random_tensor({3, 3, 4, 5}, rng, 2.0);
    record("batchnorm-train", check_op(
                                  x, [&](const Tensor<double>& in) { return bn.forward(in); },
                                  [&](const Tensor<double>& dy) { return bn.backward(dy); },
                                  {{&bn.gamma().value, &bn.gamma().grad}, {&bn.beta().value, &bn.beta().grad}},
                                  rng));
  }
  {
    engine::Relu<double> relu;
    auto x = random_away_from_zero({3, 7}, rng);
    record("relu", check_op(
                       x, [&](const Tensor<double>& in) { return relu.forward(in); },
                       [&](const Tensor<double>& dy) { return relu.backward(dy); }, {}, rng));
  }
  {
    engine::Sigmoid<double> sig;
    auto x = random_tensor({3, 7}, rng, 2.0);
    record("sigmoid", check_op(
                          x, [&](const Tensor<double>& in) { return sig.forward(in); },
                          [&](const Tensor<double>& dy) { return sig.backward(dy); }, {}, rng));
  }
  {
    engine::GlobalAvgPool<double> gap;
    auto x = random_tensor({2, 3, 4, 5}, rng);
    record("gap", check_op(
                      x, [&](const Tensor<double>& in) { return gap.forward(in); },
                      [&](const Tensor<double>& dy) { return gap.backward(dy); }, {}, rng));
  }
  {
    engine::Linear<double> lin(5, 3);
    lin.init(rng);
    auto x = random_tensor({4, 5}, rng);
    record("linear", check_op(
                         x, [&](const Tensor<double>& in) { return lin.forward(in); },
                         [&](const Tensor<double>& dy) { return lin.backward(dy); },
                         {{&lin.weight().value, &lin.weight().grad}, {&lin.bias().value, &lin.bias().grad}}, rng));
  }
  {
    engine::GruStack<double> gru(3, 4, 2);
    gru.init(rng);
    engine::SequenceBatch<double> seq{random_tensor({2, 5, 3}, rng), {5, 5}};
    auto forward = [&](const Tensor<double>& x) {
      engine::SequenceBatch<double> s{x, seq.lengths};
      return gru.forward(s).back();
    };
    std::vector<std::pair<Tensor<double>*, Tensor<double>*>> extra;
    for (std::size_t l = 0; l < 2; ++l)
      for (auto& p : gru.layer(l).params()) extra.emplace_back(p.value, p.grad);
    record("gru 5-step", check_op(
                             seq.values, forward, [&](const Tensor<double>& dy) { return gru.backward(dy); },
                             extra, rng));
  }
  {
    std::vector<double> logits(8);
    std::vector<int> labels(8);
    for (std::size_t i = 0; i < 8; ++i) {
      logits[i] = 2.0 * rng.normal();
      labels[i] = static_cast<int>(i % 2);
    }
    const auto res = engine::bce_with_logits<double>(logits, labels);
    double err = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      auto f = [&](double d) {
        auto l = logits;
        l[i] += d;
        return engine::bce_with_logits<double>(l, labels).loss;
      };
      err = std::max(err, engine::relative_error(res.dlogits[i], (f(1e-5) - f(-1e-5)) / 2e-5));
    }
    record("bce+sigmoid", err);
  }

  // Zero-initialised biases can leave a ReLU input exactly at its kink when
  // every unit feeding it is inactive; random biases keep the check at a
  // differentiable point.
  auto jitter_biases = [&](models::Model<double>& m) {
    for (auto& p : m.params())
      if (p.name.size() >= 4 && p.name.compare(p.name.size() - 4, 4, "bias") == 0)
        for (auto& v : p.value->vec()) v = 0.1 * rng.normal();
  };
  {
    auto spec = aqassess::testing::tiny_cnn_spec();
    spec.topic_hidden = 8;
    auto m = models::build_cnn<double>(21, spec);
    jitter_biases(*m);
    models::Batch<double> b;
    b.images = random_tensor({3, 1, 15, 15}, rng);
    b.labels = {1, 0, 1};
    m->set_mode(engine::Mode::train);
    record("CnnModel", check_model(*m, b, 0, 23));

    auto t = models::build_cnn_topic<double>(31, spec);
    jitter_biases(*t);
    models::Batch<double> bt;
    bt.images = random_tensor({2, 1, 15, 15}, rng);
    bt.topics = {3, 9};
    bt.labels = {0, 1};
    t->set_mode(engine::Mode::train);
    record("CnnTopicModel", check_model(*t, bt, 0, 33));
  }
  for (auto kind : {models::ModelKind::gru128, models::ModelKind::gru137}) {
    auto m = models::build_model<double>(aqassess::testing::tiny_gru_spec(kind), 41);
    jitter_biases(*m);
    models::Batch<double> b;
    b.sequences.values = random_tensor({2, 5, 3}, rng);
    b.sequences.lengths = {5, 3};
    b.topics = {1, 6};
    b.labels = {1, 0};
    record(kind == models::ModelKind::gru128 ? "GruModel" : "GruModel+topic", check_model(*m, b, 0, 43));
  }
  const double t = seconds_since(t0);
  o.require(t < 120, "runtime " + fmt("%.1f s", t));
  o.note("13 checks, max rel err " + fmt("%.2e", worst) + ", " + fmt("%.1f s", t));
  return o;
}

// ---- 2 ---------------------------------------------------------------------

Outcome shape_reproduction() {
  Outcome o;
  auto m = models::build_cnn<float>(3);
  models::LayerTrace<float> trace;
  Rng rng(1);
  const auto x = random_features(300, 128, rng);
  models::score_utterance(*m, x, std::nullopt, &trace);
  auto pooled = [&](const char* layer) {
    engine::MaxPool2d<float> pool;
    return pool.forward(trace.activation.at(layer)).shape();
  };
  using engine::Shape;
  o.require(trace.activation.at("layer1").shape() == Shape{1, 64, 300, 128}, "row 1 output 64x300x128");
  o.require(pooled("layer1") == Shape{1, 64, 149, 63}, "pool 1 output 64x149x63");
  o.require(pooled("layer3") == Shape{1, 192, 74, 31}, "pool 2 output 192x74x31");
  o.require(trace.activation.at("layer7").shape() == Shape{1, 256, 74, 31}, "row 7 output 256x74x31");
  o.require(trace.activation.at("layer8").shape() == Shape{1, 256, 36, 15}, "pool 3 output 256x36x15");
  o.require(m->trunk().gap_normalizer() == 540, "GAP over 36x15");
  o.require(m->head().weight().value.shape() == Shape{1, 256}, "256-dim GAP vector into the head");
  o.note("1x300x128 -> 64x149x63 -> 192x74x31 -> 256x36x15 -> GAP 256");
  return o;
}

// ---- 3 ---------------------------------------------------------------------

Outcome metric_arithmetic() {
  Outcome o;
  const eval::ConfusionMatrix cm{32, 7, 9, 43};
  const auto m = eval::metrics(cm);
  auto check = [&](const char* name, double got, double want) {
    o.require(std::abs(got - want) <= 5e-4, std::string(name) + " " + fmt("%.4f", got) + " vs " + fmt("%.3f", want));
    o.note(std::string(name) + " " + fmt("%.4f", got));
  };
  check("accuracy", m.accuracy, 0.824);
  check("recall", m.recall, 0.821);
  check("specificity", m.specificity, 0.827);
  check("macro-F1", m.macro_f1, 0.822);
  return o;
}

// ---- 4 ---------------------------------------------------------------------

Outcome auc_oracle() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(77);
  std::size_t exact = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s;
    std::vector<int> l;
    const std::size_t n = 2 + rng.below(19);
    do {
      s.assign(n, 0);
      l.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(rng.below(6)) / 5.0;
        l[i] = static_cast<int>(rng.below(2));
      }
    } while (std::count(l.begin(), l.end(), 1) == 0 || std::count(l.begin(), l.end(), 0) == 0);
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (l[i] == 1 && l[j] == 0) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
    if (eval::auc(s, l) == wins / pairs) ++exact;
  }
  o.require(exact == 200, std::to_string(exact) + "/200 exact");

  std::vector<double> sep;
  std::vector<int> sep_l;
  for (int i = 0; i < 50; ++i) {
    sep.push_back(0.01 * i);
    sep_l.push_back(0);
    sep.push_back(1.0 + 0.01 * i);
    sep_l.push_back(1);
  }
  const double a_sep = eval::auc(sep, sep_l);
  o.require(a_sep == 1.0, "separated AUC " + fmt("%.4f", a_sep));

  std::vector<double> rs(10000);
  std::vector<int> rl(10000);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    rs[i] = rng.uniform();
    rl[i] = static_cast<int>(rng.below(2));
  }
  const double a_rand = eval::auc(rs, rl);
  o.require(std::abs(a_rand - 0.5) <= 0.03, "random-label AUC " + fmt("%.4f", a_rand));
  const double t = seconds_since(t0);
  o.require(t < 30, "runtime " + fmt("%.1f s", t));
  o.note(std::to_string(exact) + "/200 exact, separated " + fmt("%.1f", a_sep) + ", random " + fmt("%.4f", a_rand));
  return o;
}

// ---- 5 ---------------------------------------------------------------------

void brief_training(models::Model<float>& m, Rng& rng, std::size_t steps) {
  const auto& spec = m.spec();
  std::vector<dsp::FeatureMatrix> f;
  std::vector<models::BatchItem> items;
  for (int i = 0; i < 6; ++i) f.push_back(random_features(spec.input_frames, spec.input_bins, rng));
  for (int i = 0; i < 6; ++i) items.push_back({&f[i], 1, i % 2});
  const auto batch = models::make_batch(spec, items);
  engine::Adam<float> adam({1e-2, 0.9, 0.999, 1e-8, 0.0});
  m.set_mode(engine::Mode::train);
  for (std::size_t s = 0; s < steps; ++s) {
    m.zero_grad();
    const auto r = engine::bce_with_logits<float>(m.forward(batch), batch.labels);
    m.backward(r.dlogits);
    adam.step(m.params());
  }
  m.set_mode(engine::Mode::eval);
}

Outcome cam_identity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(5150);
  double worst = 0;
  std::size_t overlap = 0, models_checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    models::ModelSpec spec;
    if (trial == 0) {
      spec = models::ModelSpec{};  // full widths on 300 x 128
    } else {
      for (auto& c : spec.channels) c = 2 + rng.below(5);
      spec.input_frames = 24 + rng.below(40);
      spec.input_bins = 24 + rng.below(20);
    }
    auto mf = models::build_cnn<float>(9000 + trial, spec);
    if (trial >= 20) brief_training(*mf, rng, 10);
    auto m = cam::to_double(*mf);
    const auto x = random_features(spec.input_frames, spec.input_bins, rng);
    const auto c = cam::cam(*m, x);
    const auto p = cam::grad_cam_pair(*m, x, "layer7");
    double scale = 0;
    for (double v : c.values.values) scale = std::max(scale, std::abs(v) / static_cast<double>(c.z));
    for (std::size_t i = 0; i < c.values.values.size(); ++i) {
      const double want = std::max(c.values.values[i], 0.0) / static_cast<double>(c.z);
      const double got = p.positive.values.values[i];
      worst = std::max(worst, engine::relative_error(got, want, 1e-12 * scale));
      if (p.positive.values.values[i] * p.negative.values.values[i] != 0) ++overlap;
    }
    ++models_checked;
  }
  o.require(worst <= 1e-6, "max rel err " + fmt("%.2e", worst));
  o.require(overlap == 0, std::to_string(overlap) + " cells with both signs");
  const double t = seconds_since(t0);
  o.require(t < 120, "runtime " + fmt("%.1f s", t));
  o.note(std::to_string(models_checked) + " models (20 random incl. one full-width, 5 trained), max rel err " +
         fmt("%.2e", worst) + ", " + fmt("%.1f s", t));
  return o;
}

// ---- 6 ---------------------------------------------------------------------

// Reduced-width settings that fit the 30-minute bound on one core.
constexpr double kCnnWidth = 1.0 / 16.0;
constexpr std::size_t kGruHidden = 64;
constexpr std::size_t kMaxEpochs = 8;
constexpr std::size_t kPatience = 3;

Outcome synthetic_experiment(const fs::path& work) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto speakers = corpus::synth_corpus(40, corpus::SynthProfile{}, 7, work / "corpus");
  const auto plan = corpus::make_folds(speakers, 5, 0.1, 7);
  const auto ds = eval::extract_dataset(speakers, dsp::FeatureKind::logmel128, corpus::Segmentation::fixed3s);
  std::printf("  criterion 6: %zu speakers, %zu utterances, features in %.0f s\n", speakers.size(),
              ds.items.size(), seconds_since(t0));
  std::fflush(stdout);

  auto run = [&](models::ModelKind kind) {
    models::ModelSpec spec;
    spec.kind = kind;
    if (models::is_cnn(kind))
      spec.scale_channels(kCnnWidth);
    else
      spec.gru_hidden = kGruHidden;
    auto hp = train::HyperParams::for_model(kind, 7);
    hp.max_epochs = kMaxEpochs;
    hp.patience = kPatience;
    eval::CvOptions opt;
    std::size_t last_fold = 0;
    opt.on_epoch = [&](std::size_t f, const train::EpochRecord& r) {
      if (f != last_fold) {
        if (last_fold) std::printf("\n");
        std::printf("  %s fold %zu valid auc:", models::to_string(kind).c_str(), f);
        last_fold = f;
      }
      std::printf(" %.3f", r.valid_auc);
      std::fflush(stdout);
    };
    auto rep = eval::cross_validate(ds, plan, spec, hp, opt);
    std::printf("\n  %s pooled auc %.4f, speaker accuracy %.3f, t=%.0f s\n", models::to_string(kind).c_str(),
                rep.pooled_auc, rep.metrics.accuracy, seconds_since(t0));
    std::fflush(stdout);
    return rep;
  };
  const auto cnn = run(models::ModelKind::cnn);
  const auto gru = run(models::ModelKind::gru128);

  o.require(cnn.pooled_auc >= 0.90, "CNN pooled AUC " + fmt("%.4f", cnn.pooled_auc));
  o.require(cnn.metrics.accuracy >= 0.90, "CNN speaker accuracy " + fmt("%.3f", cnn.metrics.accuracy));
  o.require(gru.metrics.accuracy >= 0.80, "GRU speaker accuracy " + fmt("%.3f", gru.metrics.accuracy));
  const double t = seconds_since(t0);
  o.require(t < 1800, "runtime " + fmt("%.0f s", t));
  o.note("CNN auc " + fmt("%.4f", cnn.pooled_auc) + " acc " + fmt("%.3f", cnn.metrics.accuracy) + ", GRU auc " +
         fmt("%.4f", gru.pooled_auc) + " acc " + fmt("%.3f", gru.metrics.accuracy) + ", CNN " +
         (cnn.metrics.accuracy >= gru.metrics.accuracy ? ">=" : "<") + " GRU, " + fmt("%.0f s", t));
  return o;
}

// ---- 7 ---------------------------------------------------------------------

int quiet_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "aqassess");
  std::fflush(stdout);
  std::fflush(stderr);
  const int saved_out = dup(1), saved_err = dup(2);
  FILE* null = std::fopen("/dev/null", "w");
  dup2(fileno(null), 1);
  dup2(fileno(null), 2);
  const int code = cli::run(args);
  std::cout.flush();
  std::fflush(stdout);
  std::fflush(stderr);
  dup2(saved_out, 1);
  dup2(saved_err, 2);
  close(saved_out);
  close(saved_err);
  std::fclose(null);
  return code;
}

Outcome determinism(const fs::path& work) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  auto pipeline = [&](const fs::path& d) {
    const std::string s = d.string();
    int rc = 0;
    rc |= quiet_cli({"synth", "--n-speakers", "12", "--seed", "7", "--recordings", "2", "--out", s + "/corpus"});
    rc |= quiet_cli({"folds", "--manifest", s + "/corpus/manifest.jsonl", "--k", "3", "--valid-frac", "0.25",
                     "--seed", "7", "--out", s + "/folds"});
    rc |= quiet_cli({"features", "--manifest", s + "/corpus/manifest.jsonl", "--out", s + "/features"});
    rc |= quiet_cli({"train", "--features", s + "/features", "--folds", s + "/folds", "--model", "cnn", "--seed",
                     "7", "--width-scale", "0.0625", "--max-epochs", "2", "--out", s + "/cnn"});
    rc |= quiet_cli({"eval", "--features", s + "/features", "--folds", s + "/folds", "--model", "cnn",
                     "--checkpoints", s + "/cnn", "--out", s + "/cnn-report"});
    rc |= quiet_cli({"train", "--features", s + "/features", "--folds", s + "/folds", "--model", "gru", "--seed",
                     "7", "--gru-hidden", "16", "--max-epochs", "2", "--out", s + "/gru"});
    rc |= quiet_cli({"eval", "--features", s + "/features", "--folds", s + "/folds", "--model", "gru",
                     "--checkpoints", s + "/gru", "--out", s + "/gru-report"});
    return rc;
  };
  o.require(pipeline(work / "run1") == 0, "first pipeline run");
  o.require(pipeline(work / "run2") == 0, "second pipeline run");
  std::size_t compared = 0, differ = 0;
  for (const char* sub : {"cnn", "gru", "cnn-report", "gru-report", "folds"})
    for (const auto& e : fs::directory_iterator(work / "run1" / sub)) {
      const auto name = e.path().filename().string();
      if (name == "run_config.json") continue;  // records the output paths
      ++compared;
      if (slurp(e.path()) != slurp(work / "run2" / sub / name)) {
        ++differ;
        o.require(false, std::string(sub) + "/" + name + " differs");
      }
    }
  // 3 folds x 2 models x (checkpoint + log), 2 x (report.txt + report.jsonl), folds.json
  o.require(compared == 17, std::to_string(compared) + " artifacts compared, expected 17");
  o.note(std::to_string(compared) + " reports, checkpoints, logs and fold plans compared, " + std::to_string(differ) +
         " differ, " + fmt("%.0f s", seconds_since(t0)));
  return o;
}

// ---- 8 ---------------------------------------------------------------------

Outcome dsp_properties() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(88);
  dsp::FrameSpec spec;
  auto noise = [&](std::size_t n, double scale) {
    std::vector<double> x(n);
    for (auto& v : x) v = scale * rng.normal();
    return x;
  };

  double parseval = 0;
  {
    const auto frames = dsp::frame_signal(noise(8000, 0.1), spec);
    dsp::PowerSpectrum ps(spec.n_fft);
    std::vector<double> p(spec.n_bins());
    for (std::size_t f = 0; f < frames.rows; ++f) {
      ps.compute(frames.row(f), p);
      double full = p.front() + p.back();
      for (std::size_t k = 1; k + 1 < p.size(); ++k) full += 2.0 * p[k];
      double energy = 0;
      for (double v : frames.row(f)) energy += v * v;
      parseval = std::max(parseval, std::abs(full / static_cast<double>(spec.n_fft) - energy) / energy);
    }
  }
  o.require(parseval <= 1e-9, "Parseval rel err " + fmt("%.2e", parseval));

  double shift = 0;
  {
    const auto x = noise(16000, 0.1);
    const double floor = std::log(dsp::kLogFloor);
    for (double alpha : {0.25, 3.0, 10.0}) {
      auto y = x;
      for (auto& v : y) v *= alpha;
      const auto a = dsp::log_mel(x, spec), b = dsp::log_mel(y, spec);
      for (std::size_t i = 0; i < a.values.values.size(); ++i) {
        if (a.values.values[i] <= floor + 1.0 || b.values.values[i] <= floor + 1.0) continue;
        shift = std::max(shift, std::abs(b.values.values[i] - a.values.values[i] - 2.0 * std::log(alpha)));
      }
    }
  }
  o.require(shift <= 1e-9, "log-Mel shift err " + fmt("%.2e", shift));

  double ortho = 0;
  {
    const auto d = dsp::dct_matrix(dsp::kCepstra, spec.n_mels);
    for (std::size_t i = 0; i < d.rows; ++i)
      for (std::size_t j = 0; j < d.rows; ++j) {
        double s = 0;
        for (std::size_t n = 0; n < d.cols; ++n) s += d.at(i, n) * d.at(j, n);
        ortho = std::max(ortho, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
  }
  o.require(ortho <= 1e-12, "DCT orthonormality err " + fmt("%.2e", ortho));

  std::size_t frame_ok = 0;
  const std::size_t trials = 300;
  for (std::size_t t = 0; t < trials; ++t) {
    const double duration = 0.01 + 20.0 * rng.uniform();
    const auto n = static_cast<std::size_t>(std::llround(duration * spec.sample_rate));
    const double dur = static_cast<double>(n) / spec.sample_rate;
    // integer form of ceil(duration / hop)
    const std::size_t expect = (n + spec.hop_samples() - 1) / spec.hop_samples();
    const bool ok = dsp::frame_count(n, spec) == expect &&
                    dsp::frame_signal(std::vector<double>(n, 0.0), spec).rows == expect &&
                    expect == static_cast<std::size_t>(std::ceil(dur / (spec.hop_ms / 1000.0) - 1e-9));
    frame_ok += ok;
  }
  o.require(frame_ok == trials, "n_frames " + std::to_string(frame_ok) + "/" + std::to_string(trials));
  const double t = seconds_since(t0);
  o.require(t < 30, "runtime " + fmt("%.1f s", t));
  o.note("Parseval " + fmt("%.1e", parseval) + ", shift " + fmt("%.1e", shift) + ", DCT " + fmt("%.1e", ortho) +
         ", n_frames " + std::to_string(frame_ok) + "/" + std::to_string(trials));
  return o;
}

// ---- 9 ---------------------------------------------------------------------

Outcome fusion_semantics() {
  Outcome o;
  const std::vector<double> s{0.9, 0.8, 0.7};
  const double overall = eval::fuse_speaker(s);
  o.require(std::abs(overall - 0.8) < 1e-12, "mean " + fmt("%.17g", overall));
  o.require(eval::classify_speaker(overall) == eval::SpeakerClass::high_aq, "0.8 -> High-AQ");
  o.require(eval::classify_speaker(0.5) == eval::SpeakerClass::low_aq, "0.5 -> Low-AQ");
  o.require(eval::classify_speaker(std::nextafter(0.5, 1.0)) == eval::SpeakerClass::high_aq,
            "just above 0.5 -> High-AQ");
  const std::vector<double> half{0.2, 0.8};
  o.require(eval::classify_speaker(eval::fuse_speaker(half)) == eval::SpeakerClass::low_aq,
            "{0.2, 0.8} -> Low-AQ");
  o.note("{0.9,0.8,0.7} -> " + fmt("%.3f", overall) + " -> " + eval::to_string(eval::classify_speaker(overall)) +
         "; 0.5 -> " + eval::to_string(eval::classify_speaker(0.5)));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  TempDir work("acceptance");

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient oracle", gradient_oracle},
      {2, "shape reproduction", shape_reproduction},
      {3, "metric arithmetic", metric_arithmetic},
      {4, "AUC oracle", auc_oracle},
      {5, "CAM/Grad-CAM identity", cam_identity},
      {6, "synthetic end-to-end experiment", [&] { return synthetic_experiment(work.path() / "c6"); }},
      {7, "pipeline determinism", [&] { return determinism(work.path() / "c7"); }},
      {8, "DSP properties", dsp_properties},
      {9, "fusion and threshold", fusion_semantics},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    failed += !out.pass;
    std::printf("[%s] criterion %d %s: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
