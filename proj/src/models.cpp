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
#include <fstream>
#include <sstream>

#include "aqassess/binary_io.hpp"
#include "aqassess/error.hpp"
#include "aqassess/models/build.hpp"
#include "json.hpp"

namespace aqassess::models {

using nlohmann::json;

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::cnn: return "cnn";
    case ModelKind::cnn_topic: return "cnn_topic";
    case ModelKind::gru128: return "gru128";
    case ModelKind::gru137: return "gru137";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& tag) {
  if (tag == "cnn") return ModelKind::cnn;
  if (tag == "cnn_topic") return ModelKind::cnn_topic;
  if (tag == "gru128" || tag == "gru") return ModelKind::gru128;
  if (tag == "gru137" || tag == "gru_topic") return ModelKind::gru137;
  throw UsageError("unknown model kind '" + tag + "'");
}

ModelSpec& ModelSpec::scale_channels(double factor) {
  for (auto& c : channels)
    c = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(c) * factor)));
  return *this;
}

Batch<float> make_batch(const ModelSpec& spec, std::span<const BatchItem> items) {
  if (items.empty()) throw std::invalid_argument("make_batch: no items");
  Batch<float> b;
  const bool topic = uses_topic(spec.kind);
  for (const auto& it : items) {
    b.labels.push_back(it.label);
    if (topic) b.topics.push_back(it.topic_id);
  }
  const std::size_t n = items.size();
  if (is_cnn(spec.kind)) {
    const std::size_t h = spec.input_frames, w = spec.input_bins;
    b.images = Tensor<float>({n, 1, h, w});
    for (std::size_t s = 0; s < n; ++s) {
      const auto& f = *items[s].features;
      if (f.frames() != h || f.dims() != w)
        throw std::invalid_argument("cnn input must be " + std::to_string(h) + "x" +
                                    std::to_string(w) + ", got " + std::to_string(f.frames()) +
                                    "x" + std::to_string(f.dims()));
      std::transform(f.values.values.begin(), f.values.values.end(), b.images.data() + s * h * w,
                     [](double v) { return static_cast<float>(v); });
    }
  } else {
    std::size_t steps = 0;
    for (const auto& it : items) {
      if (it.features->dims() != spec.input_bins)
        throw std::invalid_argument("gru input width must be " + std::to_string(spec.input_bins));
      if (it.features->frames() < 1) throw std::invalid_argument("gru input needs at least one frame");
      steps = std::max(steps, it.features->frames());
    }
    const std::size_t d = spec.input_bins;
    b.sequences.values = Tensor<float>({n, steps, d});
    for (std::size_t s = 0; s < n; ++s) {
      const auto& f = *items[s].features;
      std::transform(f.values.values.begin(), f.values.values.end(),
                     b.sequences.values.data() + s * steps * d,
                     [](double v) { return static_cast<float>(v); });
      b.sequences.lengths.push_back(f.frames());
    }
  }
  return b;
}

double score_utterance(Model<float>& model, const dsp::FeatureMatrix& features,
                       std::optional<int> topic_id, LayerTrace<float>* trace) {
  if (uses_topic(model.kind()) && !topic_id)
    throw std::invalid_argument(to_string(model.kind()) + " requires a topic id");
  const BatchItem item{&features, topic_id.value_or(1), 0};
  const Batch<float> b = make_batch(model.spec(), std::span(&item, 1));
  model.set_mode(Mode::eval);
  model.set_trace(trace);
  const auto logits = model.forward(b);
  model.set_trace(nullptr);
  return static_cast<double>(engine::sigmoid(logits.at(0)));
}

std::vector<double> score_batch(Model<float>& model, std::span<const BatchItem> items,
                                std::size_t batch_size) {
  model.set_mode(Mode::eval);
  std::vector<double> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); i += batch_size) {
    const auto chunk = items.subspan(i, std::min(batch_size, items.size() - i));
    for (float l : model.forward(make_batch(model.spec(), chunk)))
      out.push_back(static_cast<double>(engine::sigmoid(l)));
  }
  return out;
}

std::string spec_to_json(const ModelSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["channels"] = s.channels;
  j["topic_hidden"] = s.topic_hidden;
  j["gru_hidden"] = s.gru_hidden;
  j["gru_layers"] = s.gru_layers;
  j["input_frames"] = s.input_frames;
  j["input_bins"] = s.input_bins;
  return j.dump();
}

namespace {

ModelSpec spec_from(const json& j) {
  ModelSpec s;
  s.kind = parse_model_kind(j.at("kind").get<std::string>());
  s.channels = j.at("channels").get<std::array<std::size_t, 5>>();
  s.topic_hidden = j.at("topic_hidden").get<std::size_t>();
  s.gru_hidden = j.at("gru_hidden").get<std::size_t>();
  s.gru_layers = j.at("gru_layers").get<std::size_t>();
  s.input_frames = j.at("input_frames").get<std::size_t>();
  s.input_bins = j.at("input_bins").get<std::size_t>();
  return s;
}

void put_tensor(std::ostream& os, const Tensor<float>& t) {
  for (float v : t.vec()) io::put_f32(os, v);
}

void get_tensor(std::istream& is, Tensor<float>& t) {
  for (auto& v : t.vec()) v = io::get_f32(is);
}

}  // namespace

ModelSpec spec_from_json(const std::string& text) { return spec_from(json::parse(text)); }

void save_checkpoint(std::ostream& os, Model<float>& model, const std::string& metadata,
                     const engine::AdamState<float>* adam) {
  json meta = json::parse(metadata);
  meta["model"] = json::parse(spec_to_json(model.spec()));
  os.write("AQCK", 4);
  io::put_u8(os, kCheckpointVersion);
  io::put_str(os, to_string(model.kind()));
  io::put_str(os, meta.dump());
  const auto entries = model.state();
  io::put_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    io::put_str(os, e.name);
    const auto& shape = e.value->shape();
    io::put_u8(os, static_cast<std::uint8_t>(shape.size()));
    for (auto d : shape) io::put_u32(os, static_cast<std::uint32_t>(d));
    put_tensor(os, *e.value);
  }
  io::put_u8(os, adam ? 1 : 0);
  if (adam) {
    io::put_u64(os, adam->step);
    io::put_u32(os, static_cast<std::uint32_t>(adam->m.size()));
    for (std::size_t i = 0; i < adam->m.size(); ++i) {
      put_tensor(os, adam->m[i]);
      put_tensor(os, adam->v[i]);
    }
  }
}

LoadedCheckpoint load_checkpoint(std::istream& is) {
  try {
    io::expect_magic(is, "AQCK", "checkpoint");
    const auto version = io::get_u8(is);
    if (version != kCheckpointVersion)
      throw DataError("checkpoint: unsupported version " + std::to_string(version));
    const std::string tag = io::get_str(is);
    LoadedCheckpoint out;
    out.metadata = io::get_str(is);
    const json meta = json::parse(out.metadata);
    ModelSpec spec = spec_from(meta.at("model"));
    if (to_string(spec.kind) != tag) throw DataError("checkpoint: kind tag disagrees with metadata");
    out.model = build_model<float>(spec, 0);
    auto entries = out.model->state();
    const std::uint32_t count = io::get_u32(is);
    if (count != entries.size())
      throw DataError("checkpoint: " + std::to_string(count) + " tensors, model expects " +
                      std::to_string(entries.size()));
    for (auto& e : entries) {
      const std::string name = io::get_str(is);
      if (name != e.name) throw DataError("checkpoint: expected tensor " + e.name + ", found " + name);
      const std::size_t rank = io::get_u8(is);
      engine::Shape shape(rank);
      for (auto& d : shape) d = io::get_u32(is);
      if (shape != e.value->shape())
        throw DataError("checkpoint: shape mismatch for " + name + " (" + engine::shape_str(shape) +
                        " vs " + engine::shape_str(e.value->shape()) + ")");
      get_tensor(is, *e.value);
    }
    if (io::get_u8(is)) {
      engine::AdamState<float> st;
      st.step = io::get_u64(is);
      const std::uint32_t n = io::get_u32(is);
      auto params = out.model->params();
      if (n != params.size()) throw DataError("checkpoint: Adam state does not match parameters");
      for (const auto& p : params) {
        st.m.emplace_back(p.value->shape());
        st.v.emplace_back(p.value->shape());
        get_tensor(is, st.m.back());
        get_tensor(is, st.v.back());
      }
      out.adam = std::move(st);
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint metadata: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, Model<float>& model,
                     const std::string& metadata, const engine::AdamState<float>* adam) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  save_checkpoint(os, model, metadata, adam);
  if (!os) throw DataError("write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("missing checkpoint " + path.string());
  try {
    return load_checkpoint(is);
  } catch (const std::runtime_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void copy_state(Model<float>& src, Model<float>& dst) {
  auto a = src.state();
  auto b = dst.state();
  if (a.size() != b.size()) throw std::invalid_argument("copy_state: models differ");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].value->shape() != b[i].value->shape())
      throw std::invalid_argument("copy_state: shape mismatch for " + a[i].name);
    *b[i].value = *a[i].value;
  }
}

}  // namespace aqassess::models
