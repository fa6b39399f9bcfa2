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
#include <span>
#include <stdexcept>
#include <vector>

#include "aqassess/engine/gru.hpp"
#include "aqassess/engine/layers.hpp"
#include "aqassess/models/model.hpp"
#include "aqassess/rng.hpp"

namespace aqassess::models {

/// Sequence-to-one GRU: stacked unidirectional layers, a linear unit on the
/// top layer's state at each sequence's last valid step, sigmoid outside.
template <typename T>
class GruModel final : public Model<T> {
 public:
  explicit GruModel(ModelSpec spec)
      : spec_(std::move(spec)),
        stack_(spec_.gru_input_width(), spec_.gru_hidden, spec_.gru_layers),
        head_(spec_.gru_hidden, 1) {
    if (spec_.kind != ModelKind::gru128 && spec_.kind != ModelKind::gru137)
      throw std::invalid_argument("gru model needs kind gru128 or gru137");
  }

  void init(Rng& rng) {
    stack_.init(rng);
    head_.init(rng);
  }

  const ModelSpec& spec() const override { return spec_; }
  void set_mode(Mode) override {}

  std::vector<T> forward(const Batch<T>& batch) override {
    const engine::SequenceBatch<T>* seq = &batch.sequences;
    engine::SequenceBatch<T> with_topic;
    if (spec_.kind == ModelKind::gru137) {
      if (batch.topics.size() != seq->batch())
        throw std::invalid_argument("gru137: a topic id is required for every utterance");
      if (seq->width() == spec_.input_bins) {
        with_topic = attach_topic(*seq, batch.topics);
        seq = &with_topic;
      }
    }
    for (std::size_t len : seq->lengths)
      if (len < 1 || len > seq->steps()) throw std::invalid_argument("gru: invalid sequence length");
    lengths_ = seq->lengths;
    states_ = stack_.forward(*seq);
    const Tensor<T>& top = states_.back();
    const std::size_t n = top.dim(0), steps = top.dim(1), h = top.dim(2);
    Tensor<T> last({n, h});
    for (std::size_t s = 0; s < n; ++s) {
      const T* src = top.data() + (s * steps + lengths_[s] - 1) * h;
      std::copy(src, src + h, last.data() + s * h);
    }
    return head_.forward(last).vec();
  }

  void backward(std::span<const T> dlogits) override {
    Tensor<T> d({dlogits.size(), 1}, std::vector<T>(dlogits.begin(), dlogits.end()));
    const Tensor<T> dlast = head_.backward(d);
    const Tensor<T>& top = states_.back();
    const std::size_t n = top.dim(0), steps = top.dim(1), h = top.dim(2);
    Tensor<T> dtop(top.shape());
    for (std::size_t s = 0; s < n; ++s)
      std::copy(dlast.data() + s * h, dlast.data() + (s + 1) * h,
                dtop.data() + (s * steps + lengths_[s] - 1) * h);
    stack_.backward(dtop);
  }

  /// Hidden states of each layer from the last forward().
  const std::vector<Tensor<T>>& states() const { return states_; }

  std::vector<ParamRef<T>> params() override {
    auto out = stack_.params();
    engine::append(out, engine::prefixed(head_.params(), "head."));
    return out;
  }

  engine::GruStack<T>& stack() { return stack_; }

  static engine::SequenceBatch<T> attach_topic(const engine::SequenceBatch<T>& seq,
                                               const std::vector<int>& topics) {
    const std::size_t n = seq.batch(), steps = seq.steps(), d = seq.width();
    engine::SequenceBatch<T> out;
    Tensor<T> flat({n * steps, d}, seq.values.vec());
    std::vector<int> per_row(n * steps);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < steps; ++t) per_row[s * steps + t] = topics.at(s);
    append_topic_onehot(flat, per_row, out.values);
    out.values.reshape({n, steps, d + kTopics});
    out.lengths = seq.lengths;
    return out;
  }

 private:
  ModelSpec spec_;
  engine::GruStack<T> stack_;
  engine::Linear<T> head_;
  std::vector<Tensor<T>> states_;
  std::vector<std::size_t> lengths_;
};

}  // namespace aqassess::models
