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

#include "aqassess/train/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "aqassess/engine/blas.hpp"
#include "aqassess/engine/loss.hpp"
#include "aqassess/error.hpp"
#include "aqassess/eval/metrics.hpp"
#include "aqassess/rng.hpp"
#include "json.hpp"

namespace aqassess::train {

using nlohmann::json;

HyperParams HyperParams::for_model(models::ModelKind kind, std::uint64_t seed) {
  HyperParams hp;
  hp.lr = models::is_cnn(kind) ? 1e-3 : 1e-4;
  hp.seed = seed;
  return hp;
}

void HyperParams::validate() const {
  if (batch_size < 1) throw UsageError("batch-size must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw UsageError("lr must be a finite value >= 0");
  if (!(weight_decay >= 0.0)) throw UsageError("weight-decay must be >= 0");
  if (max_epochs < 1) throw UsageError("max-epochs must be positive");
  if (patience < 1) throw UsageError("patience must be positive");
}

std::string to_json(const HyperParams& hp) {
  json j;
  j["batch_size"] = hp.batch_size;
  j["lr"] = hp.lr;
  j["weight_decay"] = hp.weight_decay;
  j["max_epochs"] = hp.max_epochs;
  j["patience"] = hp.patience;
  j["seed"] = hp.seed;
  return j.dump();
}

HyperParams hyper_params_from_json(const std::string& text) {
  const json j = json::parse(text);
  HyperParams hp;
  hp.batch_size = j.at("batch_size").get<std::size_t>();
  hp.lr = j.at("lr").get<double>();
  hp.weight_decay = j.at("weight_decay").get<double>();
  hp.max_epochs = j.at("max_epochs").get<std::size_t>();
  hp.patience = j.at("patience").get<std::size_t>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  return hp;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> lengths,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   BatchMode mode) {
  if (lengths.empty()) throw DataError("make_batches: empty dataset");
  if (batch_size < 1) throw UsageError("make_batches: batch size must be positive");
  Rng rng(seed);
  std::vector<std::size_t> order(lengths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  if (mode == BatchMode::variable)
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size)
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
  if (mode == BatchMode::variable) rng.shuffle(batches);
  return batches;
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["valid_loss"] = e.valid_loss;
    j["valid_auc"] = e.valid_auc;
    out += j.dump() + "\n";
  }
  json s;
  s["selected_epoch"] = selected_epoch;
  s["best_valid_auc"] = best_valid_auc;
  s["epochs_run"] = epochs.size();
  out += s.dump() + "\n";
  return out;
}

Evaluation evaluate(models::Model<float>& model, std::span<const Example> examples,
                    std::size_t batch_size) {
  if (examples.empty()) throw DataError("evaluate: no examples");
  std::vector<models::BatchItem> items;
  std::vector<int> labels;
  for (const auto& e : examples) {
    items.push_back({e.features, e.topic_id, e.label});
    labels.push_back(e.label);
  }
  Evaluation ev;
  ev.scores = models::score_batch(model, items, batch_size);
  for (std::size_t i = 0; i < ev.scores.size(); ++i) {
    if (!std::isfinite(ev.scores[i])) throw NumericalError("non-finite score on " + examples[i].utterance_id);
    ev.loss += engine::bce_loss(ev.scores[i], labels[i]);
  }
  ev.loss /= static_cast<double>(ev.scores.size());
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 &&
                    std::count(labels.begin(), labels.end(), 0) > 0;
  ev.auc = both ? eval::auc(ev.scores, labels) : std::nan("");
  return ev;
}

namespace {

void check_membership(std::span<const Example> examples, const std::vector<std::string>& allowed,
                      const corpus::Fold& fold, const char* role, std::set<std::string>& visited) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  const std::set<std::string> test(fold.test.begin(), fold.test.end());
  for (const auto& e : examples) {
    if (test.count(e.speaker_id))
      throw DataError(std::string("train_fold: test speaker ") + e.speaker_id + " in " + role + " data");
    if (!ok.count(e.speaker_id))
      throw DataError(std::string("train_fold: speaker ") + e.speaker_id + " is not a " + role +
                      " speaker of this fold");
    visited.insert(e.speaker_id);
  }
}

}  // namespace

TrainLog train_fold(models::Model<float>& model, const corpus::Fold& fold,
                    std::span<const Example> train, std::span<const Example> valid,
                    const HyperParams& hp, const TrainOptions& options) {
  hp.validate();
  engine::configure_runtime();
  const auto t0 = std::chrono::steady_clock::now();
  if (train.empty()) throw DataError("train_fold: no training data");
  if (valid.empty()) throw DataError("train_fold: no validation data");
  const auto n_pos = std::count_if(train.begin(), train.end(), [](const Example& e) { return e.label == 1; });
  if (n_pos == 0 || n_pos == static_cast<std::ptrdiff_t>(train.size()))
    throw DataError("train_fold: degenerate fold (single-class training data)");

  TrainLog log;
  check_membership(train, fold.train, fold, "training", log.visited_speakers);
  check_membership(valid, fold.valid, fold, "validation", log.visited_speakers);

  const bool cnn = models::is_cnn(model.kind());
  if (cnn && train.size() < 2) throw DataError("train_fold: batch normalization needs >= 2 examples");
  std::vector<std::size_t> lengths;
  for (const auto& e : train) lengths.push_back(e.features->frames());

  engine::Adam<float> adam({hp.lr, 0.9, 0.999, 1e-8, hp.weight_decay});
  const auto params = model.params();
  auto state = model.state();
  std::vector<engine::Tensor<float>> best_state;
  engine::AdamState<float> best_adam;
  log.best_valid_auc = -1;
  double best_loss = 0;

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    auto batches = make_batches(lengths, hp.batch_size, derive_seed(hp.seed, epoch),
                                cnn ? BatchMode::fixed : BatchMode::variable);
    // A single leftover item cannot be batch-normalized; fold it into its neighbour.
    if (cnn && batches.size() > 1 && batches.back().size() == 1) {
      batches[batches.size() - 2].push_back(batches.back().front());
      batches.pop_back();
    }
    model.set_mode(engine::Mode::train);
    double loss_sum = 0;
    std::vector<models::BatchItem> items;
    for (const auto& b : batches) {
      items.clear();
      for (std::size_t i : b) items.push_back({train[i].features, train[i].topic_id, train[i].label});
      const auto batch = models::make_batch(model.spec(), items);
      model.zero_grad();
      const auto logits = model.forward(batch);
      const auto r = engine::bce_with_logits<float>(logits, batch.labels);
      const bool finite_logits =
          std::all_of(logits.begin(), logits.end(), [](float v) { return std::isfinite(v); });
      if (!finite_logits || !std::isfinite(r.loss))
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
      loss_sum += r.loss * static_cast<double>(b.size());
      model.backward(r.dlogits);
      adam.step(params);
    }

    const Evaluation ev = evaluate(model, valid, hp.batch_size);
    if (std::isnan(ev.auc)) throw DataError("train_fold: validation set lacks one of the labels");
    EpochRecord rec{epoch, loss_sum / static_cast<double>(train.size()), ev.loss, ev.auc};
    log.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);

    // Higher AUC wins; an AUC tie goes to the lower validation loss.
    const bool better =
        ev.auc > log.best_valid_auc || (ev.auc == log.best_valid_auc && ev.loss < best_loss);
    if (better) {
      log.best_valid_auc = ev.auc;
      best_loss = ev.loss;
      log.selected_epoch = epoch;
      best_state.clear();
      for (const auto& s : state) best_state.push_back(*s.value);
      best_adam = adam.state();
    } else if (epoch - log.selected_epoch >= hp.patience) {
      break;
    }
  }

  for (std::size_t i = 0; i < state.size(); ++i) *state[i].value = best_state[i];

  json meta = json::parse(options.metadata);
  meta["train"] = {{"hyper_params", json::parse(to_json(hp))},
                   {"selected_epoch", log.selected_epoch},
                   {"best_valid_auc", log.best_valid_auc}};
  if (options.checkpoint) models::save_checkpoint(*options.checkpoint, model, meta.dump(), &best_adam);
  if (options.log) {
    std::ofstream os(*options.log);
    if (!os) throw DataError("cannot write " + options.log->string());
    os << log.to_jsonl();
  }
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

}  // namespace aqassess::train
