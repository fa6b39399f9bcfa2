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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "aqassess/corpus/corpus.hpp"
#include "aqassess/dsp/features.hpp"
#include "aqassess/engine/adam.hpp"
#include "aqassess/models/build.hpp"

namespace aqassess::train {

struct HyperParams {
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  std::size_t max_epochs = 50;
  std::size_t patience = 8;
  std::uint64_t seed = 0;

  /// Learning rate 1e-3 for CNN kinds, 1e-4 for GRU kinds.
  static HyperParams for_model(models::ModelKind kind, std::uint64_t seed = 0);
  void validate() const;
};

std::string to_json(const HyperParams& hp);
HyperParams hyper_params_from_json(const std::string& text);

enum class BatchMode { fixed, variable };

/// Shuffled mini-batches of indices into `lengths`. Variable mode groups
/// items of similar length into a batch before shuffling the batch order.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> lengths,
                                                   std::size_t batch_size, std::uint64_t seed,
                                                   BatchMode mode);

/// One training or validation item.
struct Example {
  const dsp::FeatureMatrix* features = nullptr;
  int topic_id = 1;
  int label = 0;
  std::string speaker_id;
  std::string utterance_id;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0;
  double valid_loss = 0;
  double valid_auc = 0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::size_t selected_epoch = 0;
  double best_valid_auc = 0;
  double wall_seconds = 0;  // kept out of the JSONL rendering
  std::set<std::string> visited_speakers;

  /// One line per epoch plus a summary line.
  std::string to_jsonl() const;
};

struct TrainOptions {
  std::optional<std::filesystem::path> checkpoint;  // best-epoch checkpoint
  std::optional<std::filesystem::path> log;         // TrainLog JSONL
  std::string metadata = "{}";                      // merged into the checkpoint
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Trains `model` on `train` with Adam and selects the epoch with the best
/// validation AUC (ties go to the lower validation loss, then the earliest). On return the model holds the
/// selected parameters. Every example must belong to the fold's training or
/// validation speakers.
TrainLog train_fold(models::Model<float>& model, const corpus::Fold& fold,
                    std::span<const Example> train, std::span<const Example> valid,
                    const HyperParams& hp, const TrainOptions& options = {});

/// Mean BCE and AUC of `examples` under the model in eval mode.
struct Evaluation {
  std::vector<double> scores;
  double loss = 0;
  double auc = 0;
};
Evaluation evaluate(models::Model<float>& model, std::span<const Example> examples,
                    std::size_t batch_size = 64);

}  // namespace aqassess::train
