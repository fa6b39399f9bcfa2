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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aqassess/engine/layers.hpp"
#include "aqassess/models/model.hpp"
#include "aqassess/rng.hpp"

namespace aqassess::models {

/// Convolutional trunk of the assessment CNN:
///
///   row 1  conv3x3-c1-BN-ReLU    row 5  conv3x3-c3-BN-ReLU
///   row 2  maxpool3x3/2          row 6  conv3x3-c4-BN-ReLU
///   row 3  conv3x3-c2-BN-ReLU    row 7  conv3x3-c5-BN-ReLU
///   row 4  maxpool3x3/2          row 8  maxpool3x3/2
///                                row 9  global average pooling
///
/// Taps are named after their row: layer1, layer3, layer5, layer6, layer7
/// (conv outputs after BN-ReLU) and layer8 (the map that feeds GAP).
template <typename T>
class CnnTrunk {
 public:
  static constexpr std::array<const char*, 5> kConvTaps{"layer1", "layer3", "layer5", "layer6",
                                                        "layer7"};
  static constexpr const char* kGapInput = "layer8";

  CnnTrunk() = default;
  explicit CnnTrunk(const std::array<std::size_t, 5>& ch) {
    std::size_t in = 1;
    for (std::size_t i = 0; i < 5; ++i) {
      conv_[i] = engine::Conv2d<T>(in, ch[i]);
      bn_[i] = engine::BatchNorm2d<T>(ch[i]);
      in = ch[i];
    }
  }

  void init(Rng& rng) {
    for (auto& c : conv_) c.init(rng);
  }

  void set_mode(Mode m) {
    for (auto& b : bn_) b.set_mode(m);
  }
  void set_trace(LayerTrace<T>* t) { trace_ = t; }

  std::size_t out_channels() const { return conv_[4].out_channels(); }
  std::size_t gap_normalizer() const { return gap_.normalizer(); }

  /// [N x 1 x H x W] -> [N x C5] embedding.
  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> a = block(0, x);
    a = pool_[0].forward(a);
    a = block(1, a);
    a = pool_[1].forward(a);
    a = block(2, a);
    a = block(3, a);
    a = block(4, a);
    a = pool_[2].forward(a);
    record_activation(kGapInput, a);
    return gap_.forward(a);
  }

  Tensor<T> backward(const Tensor<T>& demb) {
    Tensor<T> g = gap_.backward(demb);
    record_gradient(kGapInput, g);
    g = pool_[2].backward(g);
    g = block_backward(4, std::move(g));
    g = block_backward(3, std::move(g));
    g = block_backward(2, std::move(g));
    g = pool_[1].backward(g);
    g = block_backward(1, std::move(g));
    g = pool_[0].backward(g);
    return block_backward(0, std::move(g));
  }

  std::vector<ParamRef<T>> params() {
    std::vector<ParamRef<T>> out;
    for (std::size_t i = 0; i < 5; ++i) {
      const std::string id = std::to_string(i + 1);
      engine::append(out, engine::prefixed(conv_[i].params(), "conv" + id + "."));
      engine::append(out, engine::prefixed(bn_[i].params(), "bn" + id + "."));
    }
    return out;
  }

  std::vector<ParamRef<T>> buffers() {
    std::vector<ParamRef<T>> out;
    for (std::size_t i = 0; i < 5; ++i)
      engine::append(out, engine::prefixed(bn_[i].buffers(), "bn" + std::to_string(i + 1) + "."));
    return out;
  }

  engine::Conv2d<T>& conv(std::size_t i) { return conv_.at(i); }
  engine::BatchNorm2d<T>& bn(std::size_t i) { return bn_.at(i); }

 private:
  Tensor<T> block(std::size_t i, const Tensor<T>& x) {
    Tensor<T> a = relu_[i].forward(bn_[i].forward(conv_[i].forward(x)));
    record_activation(kConvTaps[i], a);
    return a;
  }

  Tensor<T> block_backward(std::size_t i, Tensor<T> g) {
    record_gradient(kConvTaps[i], g);
    return conv_[i].backward(bn_[i].backward(relu_[i].backward(std::move(g))));
  }

  void record_activation(const char* name, const Tensor<T>& a) {
    if (trace_) trace_->activation[name] = a;
  }
  void record_gradient(const char* name, const Tensor<T>& g) {
    if (trace_) trace_->gradient[name] = g;
  }

  std::array<engine::Conv2d<T>, 5> conv_;
  std::array<engine::BatchNorm2d<T>, 5> bn_;
  std::array<engine::Relu<T>, 5> relu_;
  std::array<engine::MaxPool2d<T>, 3> pool_;
  engine::GlobalAvgPool<T> gap_;
  LayerTrace<T>* trace_ = nullptr;
};

/// CNN trunk with a single linear unit on the GAP embedding.
template <typename T>
class CnnModel final : public Model<T> {
 public:
  explicit CnnModel(ModelSpec spec) : spec_(std::move(spec)), trunk_(spec_.channels),
                                      head_(spec_.channels[4], 1) {
    spec_.kind = ModelKind::cnn;
  }

  void init(Rng& rng) {
    trunk_.init(rng);
    head_.init(rng);
  }

  const ModelSpec& spec() const override { return spec_; }
  void set_mode(Mode m) override { trunk_.set_mode(m); }
  void set_trace(LayerTrace<T>* t) override { trunk_.set_trace(t); }

  std::vector<T> forward(const Batch<T>& batch) override {
    const Tensor<T> y = head_.forward(trunk_.forward(batch.images));
    return y.vec();
  }

  void backward(std::span<const T> dlogits) override {
    Tensor<T> d({dlogits.size(), 1}, std::vector<T>(dlogits.begin(), dlogits.end()));
    trunk_.backward(head_.backward(d));
  }

  std::vector<ParamRef<T>> params() override {
    auto out = trunk_.params();
    engine::append(out, engine::prefixed(head_.params(), "head."));
    return out;
  }
  std::vector<ParamRef<T>> buffers() override { return trunk_.buffers(); }

  CnnTrunk<T>& trunk() { return trunk_; }
  engine::Linear<T>& head() { return head_; }

 private:
  ModelSpec spec_;
  CnnTrunk<T> trunk_;
  engine::Linear<T> head_;
};

/// CNN trunk whose GAP embedding is concatenated with a one-hot topic and
/// fed through two ReLU hidden layers before the output unit.
template <typename T>
class CnnTopicModel final : public Model<T> {
 public:
  explicit CnnTopicModel(ModelSpec spec)
      : spec_(std::move(spec)),
        trunk_(spec_.channels),
        fc1_(spec_.channels[4] + kTopics, spec_.topic_hidden),
        fc2_(spec_.topic_hidden, spec_.topic_hidden),
        out_(spec_.topic_hidden, 1) {
    spec_.kind = ModelKind::cnn_topic;
  }

  void init(Rng& rng) {
    trunk_.init(rng);
    fc1_.init(rng);
    fc2_.init(rng);
    out_.init(rng);
  }

  const ModelSpec& spec() const override { return spec_; }
  void set_mode(Mode m) override { trunk_.set_mode(m); }
  void set_trace(LayerTrace<T>* t) override { trunk_.set_trace(t); }

  std::vector<T> forward(const Batch<T>& batch) override {
    if (batch.topics.size() != batch.images.dim(0))
      throw std::invalid_argument("cnn_topic: a topic id is required for every utterance");
    Tensor<T> joined;
    append_topic_onehot(trunk_.forward(batch.images), batch.topics, joined);
    Tensor<T> h = relu1_.forward(fc1_.forward(joined));
    h = relu2_.forward(fc2_.forward(h));
    return out_.forward(h).vec();
  }

  void backward(std::span<const T> dlogits) override {
    Tensor<T> d({dlogits.size(), 1}, std::vector<T>(dlogits.begin(), dlogits.end()));
    Tensor<T> g = fc1_.backward(relu1_.backward(fc2_.backward(relu2_.backward(out_.backward(d)))));
    const std::size_t n = g.dim(0), c = trunk_.out_channels(), w = c + kTopics;
    Tensor<T> demb({n, c});
    for (std::size_t s = 0; s < n; ++s)
      std::copy(g.data() + s * w, g.data() + s * w + c, demb.data() + s * c);
    trunk_.backward(demb);
  }

  std::vector<ParamRef<T>> params() override {
    auto out = trunk_.params();
    engine::append(out, engine::prefixed(fc1_.params(), "fc1."));
    engine::append(out, engine::prefixed(fc2_.params(), "fc2."));
    engine::append(out, engine::prefixed(out_.params(), "head."));
    return out;
  }
  std::vector<ParamRef<T>> buffers() override { return trunk_.buffers(); }

  CnnTrunk<T>& trunk() { return trunk_; }
  engine::Linear<T>& fc1() { return fc1_; }

 private:
  ModelSpec spec_;
  CnnTrunk<T> trunk_;
  engine::Linear<T> fc1_, fc2_, out_;
  engine::Relu<T> relu1_, relu2_;
};

}  // namespace aqassess::models
