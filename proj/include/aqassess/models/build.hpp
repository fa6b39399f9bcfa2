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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqassess/dsp/features.hpp"
#include "aqassess/engine/adam.hpp"
#include "aqassess/models/cnn.hpp"
#include "aqassess/models/gru_model.hpp"
#include "aqassess/models/model.hpp"
#include "aqassess/rng.hpp"

namespace aqassess::models {

template <typename T>
std::unique_ptr<CnnModel<T>> build_cnn(std::uint64_t seed, ModelSpec spec = {}) {
  spec.kind = ModelKind::cnn;
  auto m = std::make_unique<CnnModel<T>>(spec);
  Rng rng(seed);
  m->init(rng);
  return m;
}

template <typename T>
std::unique_ptr<CnnTopicModel<T>> build_cnn_topic(std::uint64_t seed, ModelSpec spec = {}) {
  spec.kind = ModelKind::cnn_topic;
  auto m = std::make_unique<CnnTopicModel<T>>(spec);
  Rng rng(seed);
  m->init(rng);
  return m;
}

/// `input_width` is 128 (plain log-Mel) or 137 (log-Mel + topic one-hot).
template <typename T>
std::unique_ptr<GruModel<T>> build_gru(std::size_t input_width, std::uint64_t seed,
                                       ModelSpec spec = {}) {
  if (input_width == spec.input_bins)
    spec.kind = ModelKind::gru128;
  else if (input_width == spec.input_bins + kTopics)
    spec.kind = ModelKind::gru137;
  else
    throw std::invalid_argument("build_gru: input width must be " + std::to_string(spec.input_bins) +
                                " or " + std::to_string(spec.input_bins + kTopics));
  auto m = std::make_unique<GruModel<T>>(spec);
  Rng rng(seed);
  m->init(rng);
  return m;
}

template <typename T>
std::unique_ptr<Model<T>> build_model(const ModelSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::cnn: return build_cnn<T>(seed, spec);
    case ModelKind::cnn_topic: return build_cnn_topic<T>(seed, spec);
    case ModelKind::gru128: return build_gru<T>(spec.input_bins, seed, spec);
    case ModelKind::gru137: return build_gru<T>(spec.input_bins + kTopics, seed, spec);
  }
  throw std::invalid_argument("unknown model kind");
}

/// Item of a scoring or training batch.
struct BatchItem {
  const dsp::FeatureMatrix* features;
  int topic_id;
  int label;
};

/// Stacks feature matrices into the input the model kind expects. CNN kinds
/// require every item to match spec.input_frames x spec.input_bins; GRU kinds
/// right-pad to the longest item and carry valid lengths.
Batch<float> make_batch(const ModelSpec& spec, std::span<const BatchItem> items);

/// Sigmoid score in (0, 1) for one utterance, BN in eval mode.
double score_utterance(Model<float>& model, const dsp::FeatureMatrix& features,
                       std::optional<int> topic_id = std::nullopt,
                       LayerTrace<float>* trace = nullptr);

/// Scores many utterances in eval mode, `batch_size` at a time.
std::vector<double> score_batch(Model<float>& model, std::span<const BatchItem> items,
                                std::size_t batch_size = 64);

// ---- checkpoints ---------------------------------------------------------
//
// Layout: "AQCK", version (u8), model-kind tag (str), metadata JSON (str),
// entry count (u32), entries {name (str), rank (u8), dims (u32 x rank),
// float32 values}, Adam flag (u8) [, step (u64), m and v per trainable
// parameter]. Strings are a u32 length followed by bytes; all little-endian.

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
  std::unique_ptr<Model<float>> model;
  std::string metadata;  // JSON object; always holds "model" (the ModelSpec)
  std::optional<engine::AdamState<float>> adam;
};

std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const std::string& text);

/// `metadata` is a JSON object; the model spec is merged in under "model".
void save_checkpoint(std::ostream& os, Model<float>& model, const std::string& metadata = "{}",
                     const engine::AdamState<float>* adam = nullptr);
LoadedCheckpoint load_checkpoint(std::istream& is);
void save_checkpoint(const std::filesystem::path& path, Model<float>& model,
                     const std::string& metadata = "{}",
                     const engine::AdamState<float>* adam = nullptr);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Copies every parameter and buffer value from `src` into `dst`.
void copy_state(Model<float>& src, Model<float>& dst);

}  // namespace aqassess::models
