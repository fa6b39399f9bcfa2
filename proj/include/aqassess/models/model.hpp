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

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqassess/engine/gru.hpp"
#include "aqassess/engine/layers.hpp"
#include "aqassess/engine/tensor.hpp"

namespace aqassess::models {

using engine::Mode;
using engine::ParamRef;
using engine::Tensor;

inline constexpr std::size_t kTopics = 9;

enum class ModelKind { cnn, cnn_topic, gru128, gru137 };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& tag);

inline bool is_cnn(ModelKind k) { return k == ModelKind::cnn || k == ModelKind::cnn_topic; }
inline bool uses_topic(ModelKind k) { return k == ModelKind::cnn_topic || k == ModelKind::gru137; }

/// Architecture description sufficient to rebuild a model from a checkpoint.
struct ModelSpec {
  ModelKind kind = ModelKind::cnn;
  // Output channels of the five conv rows (full widths by default).
  std::array<std::size_t, 5> channels{64, 192, 384, 256, 256};
  std::size_t topic_hidden = 256;
  std::size_t gru_hidden = 200;
  std::size_t gru_layers = 2;
  std::size_t input_frames = 300;  // CNN input height
  std::size_t input_bins = 128;    // CNN input width / GRU base feature width

  /// Scales every conv width by `factor` (minimum 1 channel).
  ModelSpec& scale_channels(double factor);
  std::size_t gru_input_width() const { return input_bins + (kind == ModelKind::gru137 ? kTopics : 0); }
};

/// Model input for one batch. CNN kinds read `images` [N x 1 x H x W];
/// GRU kinds read `sequences` (topic columns are appended by the model).
template <typename T>
struct Batch {
  Tensor<T> images;
  engine::SequenceBatch<T> sequences;
  std::vector<int> topics;  // 1..9 per item, empty when unused
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// Activation and gradient captured at named layer outputs.
template <typename T>
struct LayerTrace {
  std::map<std::string, Tensor<T>> activation;
  std::map<std::string, Tensor<T>> gradient;
};

template <typename T>
class Model {
 public:
  virtual ~Model() = default;
  virtual const ModelSpec& spec() const = 0;
  ModelKind kind() const { return spec().kind; }
  virtual void set_mode(Mode m) = 0;
  /// Pre-sigmoid logits, one per batch item.
  virtual std::vector<T> forward(const Batch<T>& batch) = 0;
  /// Back-propagates d(loss)/d(logit) through the last forward().
  virtual void backward(std::span<const T> dlogits) = 0;
  virtual std::vector<ParamRef<T>> params() = 0;
  virtual std::vector<ParamRef<T>> buffers() { return {}; }
  virtual void set_trace(LayerTrace<T>* trace) { (void)trace; }

  void zero_grad() {
    for (auto& p : params()) p.grad->fill(T(0));
  }
  /// Trainable parameters followed by buffers, as stored in checkpoints.
  std::vector<ParamRef<T>> state() {
    auto s = params();
    engine::append(s, buffers());
    return s;
  }
};

template <typename T>
void append_topic_onehot(const Tensor<T>& src, const std::vector<int>& topics, Tensor<T>& dst) {
  const std::size_t n = src.dim(0), d = src.dim(1);
  dst = Tensor<T>({n, d + kTopics});
  for (std::size_t s = 0; s < n; ++s) {
    if (topics.at(s) < 1 || topics[s] > static_cast<int>(kTopics))
      throw std::invalid_argument("topic id must be in 1..9");
    std::copy(src.data() + s * d, src.data() + (s + 1) * d, dst.data() + s * (d + kTopics));
    dst[s * (d + kTopics) + d + static_cast<std::size_t>(topics[s] - 1)] = T(1);
  }
}

}  // namespace aqassess::models
