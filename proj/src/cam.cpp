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

#include "aqassess/cam/cam.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "aqassess/error.hpp"
#include "aqassess/models/build.hpp"

namespace aqassess::cam {

using models::Model;
using models::Tensor;

std::string to_string(Sign s) { return s == Sign::positive ? "positive" : "negative"; }

Sign parse_sign(const std::string& s) {
  if (s == "positive" || s == "pos") return Sign::positive;
  if (s == "negative" || s == "neg") return Sign::negative;
  throw UsageError("unknown sign '" + s + "' (expected positive or negative)");
}

std::unique_ptr<Model<double>> to_double(Model<float>& model) {
  if (!models::is_cnn(model.kind())) throw UsageError("class activation maps need a CNN model");
  auto d = models::build_model<double>(model.spec(), 0);
  auto src = model.state();
  auto dst = d->state();
  for (std::size_t i = 0; i < src.size(); ++i)
    std::copy(src[i].value->vec().begin(), src[i].value->vec().end(), dst[i].value->vec().begin());
  d->set_mode(models::Mode::eval);
  return d;
}

namespace {

models::Batch<double> single(const Model<double>& model, const dsp::FeatureMatrix& f, int topic) {
  const auto& spec = model.spec();
  if (f.frames() != spec.input_frames || f.dims() != spec.input_bins)
    throw DataError("cam input must be " + std::to_string(spec.input_frames) + "x" +
                    std::to_string(spec.input_bins) + ", got " + std::to_string(f.frames()) + "x" +
                    std::to_string(f.dims()));
  models::Batch<double> b;
  b.images = Tensor<double>({1, 1, f.frames(), f.dims()}, f.values.values);
  if (models::uses_topic(spec.kind)) b.topics = {topic};
  b.labels = {0};
  return b;
}

void check_layer(const std::string& layer) {
  static const char* known[] = {"layer1", "layer3", "layer5", "layer6", "layer7", "layer8"};
  for (const char* k : known)
    if (layer == k) return;
  throw UsageError("unknown layer '" + layer + "' (expected layer1, layer3, layer5, layer6, layer7 or layer8)");
}

// Channel-weighted sum of a [1 x C x H x W] map.
dsp::Matrix weighted_sum(const Tensor<double>& f, const std::vector<double>& w) {
  const std::size_t c = f.dim(1), h = f.dim(2), wd = f.dim(3), hw = h * wd;
  dsp::Matrix m(h, wd);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < hw; ++i) m.values[i] += w[k] * f[k * hw + i];
  return m;
}

}  // namespace

CamMap cam(Model<double>& model, const dsp::FeatureMatrix& input, const std::string& layer) {
  auto* cnn = dynamic_cast<models::CnnModel<double>*>(&model);
  if (!cnn) throw UsageError("cam needs global average pooling followed by the output unit (model kind cnn)");
  if (layer != "layer7" && layer != "layer8")
    throw UsageError("cam is defined on layer7 or layer8, not '" + layer + "'");
  models::LayerTrace<double> trace;
  model.set_mode(models::Mode::eval);
  model.set_trace(&trace);
  model.forward(single(model, input, 1));
  model.set_trace(nullptr);
  const auto& f = trace.activation.at(layer);
  const auto& w = cnn->head().weight().value.vec();
  CamMap out;
  out.values = weighted_sum(f, w);
  out.layer = layer;
  out.z = f.dim(2) * f.dim(3);
  return out;
}

CamPair grad_cam_pair(Model<double>& model, const dsp::FeatureMatrix& input, const std::string& layer,
                      int topic_id) {
  check_layer(layer);
  if (!models::is_cnn(model.kind())) throw UsageError("grad_cam needs a CNN model");
  models::LayerTrace<double> trace;
  model.set_mode(models::Mode::eval);
  model.set_trace(&trace);
  const auto logits = model.forward(single(model, input, topic_id));
  const double one = 1.0;
  model.backward(std::span<const double>(&one, 1));
  model.set_trace(nullptr);
  model.zero_grad();

  const auto& f = trace.activation.at(layer);
  const auto& g = trace.gradient.at(layer);
  const std::size_t c = f.dim(1), hw = f.dim(2) * f.dim(3);
  std::vector<double> alpha(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    double s = 0;
    for (std::size_t i = 0; i < hw; ++i) s += g[k * hw + i];
    alpha[k] = s / static_cast<double>(hw);
  }
  const dsp::Matrix lin = weighted_sum(f, alpha);
  CamPair p;
  p.logit = logits.at(0);
  p.positive = {lin, Sign::positive, layer, hw};
  p.negative = {lin, Sign::negative, layer, hw};
  for (auto& v : p.positive.values.values) v = std::max(v, 0.0);
  for (auto& v : p.negative.values.values) v = std::max(-v, 0.0);
  return p;
}

CamMap grad_cam(Model<double>& model, const dsp::FeatureMatrix& input, const std::string& layer,
                Sign sign, int topic_id) {
  auto p = grad_cam_pair(model, input, layer, topic_id);
  return sign == Sign::positive ? std::move(p.positive) : std::move(p.negative);
}

dsp::Matrix upsample(const dsp::Matrix& map, std::size_t rows, std::size_t cols) {
  if (map.rows == 0 || map.cols == 0) throw std::invalid_argument("upsample: empty map");
  if (rows < map.rows || cols < map.cols)
    throw std::invalid_argument("upsample: target " + std::to_string(rows) + "x" + std::to_string(cols) +
                                " smaller than map " + std::to_string(map.rows) + "x" +
                                std::to_string(map.cols));
  auto coord = [](std::size_t i, std::size_t out, std::size_t in) {
    return out > 1 ? static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
  };
  dsp::Matrix o(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const double y = coord(i, rows, map.rows);
    const auto y0 = std::min(static_cast<std::size_t>(y), map.rows - 1);
    const auto y1 = std::min(y0 + 1, map.rows - 1);
    const double fy = y - static_cast<double>(y0);
    for (std::size_t j = 0; j < cols; ++j) {
      const double x = coord(j, cols, map.cols);
      const auto x0 = std::min(static_cast<std::size_t>(x), map.cols - 1);
      const auto x1 = std::min(x0 + 1, map.cols - 1);
      const double fx = x - static_cast<double>(x0);
      const double top = (1 - fx) * map.at(y0, x0) + fx * map.at(y0, x1);
      const double bot = (1 - fx) * map.at(y1, x0) + fx * map.at(y1, x1);
      o.at(i, j) = (1 - fy) * top + fy * bot;
    }
  }
  return o;
}

namespace {

void extend_range(const std::vector<double>& v, double& lo, double& hi) {
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
}

}  // namespace

MapRange joint_range(const dsp::Matrix& pos, const dsp::Matrix& neg) {
  MapRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  extend_range(pos.values, r.lo, r.hi);
  extend_range(neg.values, r.lo, r.hi);
  return r;
}

OverlayImage render_overlay(const dsp::Matrix& logmel, const dsp::Matrix& pos, const dsp::Matrix& neg,
                            double alpha) {
  return render_overlay(logmel, pos, neg, alpha, joint_range(pos, neg));
}

OverlayImage render_overlay(const dsp::Matrix& logmel, const dsp::Matrix& pos, const dsp::Matrix& neg,
                            double alpha, MapRange range) {
  const bool has_neg = !neg.values.empty();
  if (pos.rows != logmel.rows || pos.cols != logmel.cols ||
      (has_neg && (neg.rows != logmel.rows || neg.cols != logmel.cols)))
    throw std::invalid_argument("render_overlay: map and log-Mel dimensions differ");
  if (!(alpha >= 0 && alpha <= 1)) throw UsageError("alpha must be in [0, 1]");

  double blo = std::numeric_limits<double>::infinity(), bhi = -blo;
  extend_range(logmel.values, blo, bhi);
  const double mlo = range.lo, mhi = range.hi;
  const bool maps_visible = mhi > mlo;

  OverlayImage img;
  img.width = logmel.rows;   // time
  img.height = logmel.cols;  // frequency
  img.rgb.assign(3 * img.width * img.height, 0.0);
  for (std::size_t t = 0; t < logmel.rows; ++t)
    for (std::size_t b = 0; b < logmel.cols; ++b) {
      const std::size_t row = logmel.cols - 1 - b;
      const double base = bhi > blo ? (logmel.at(t, b) - blo) / (bhi - blo) : 0.0;
      double r = base, g = base, bl = base;
      if (maps_visible) {
        const double ap = alpha * std::clamp((pos.at(t, b) - mlo) / (mhi - mlo), 0.0, 1.0);
        r = (1 - ap) * r + ap;
        g = (1 - ap) * g;
        bl = (1 - ap) * bl;
        if (has_neg) {
          const double an = alpha * std::clamp((neg.at(t, b) - mlo) / (mhi - mlo), 0.0, 1.0);
          r = (1 - an) * r;
          g = (1 - an) * g;
          bl = (1 - an) * bl + an;
        }
      }
      img.at(row, t, 0) = r;
      img.at(row, t, 1) = g;
      img.at(row, t, 2) = bl;
    }
  return img;
}

OverlayImage concat_horizontal(const std::vector<OverlayImage>& panels) {
  if (panels.empty()) throw std::invalid_argument("concat_horizontal: no panels");
  OverlayImage o;
  for (const auto& p : panels) {
    o.width += p.width;
    o.height = std::max(o.height, p.height);
  }
  o.rgb.assign(3 * o.width * o.height, 1.0);
  std::size_t x0 = 0;
  for (const auto& p : panels) {
    for (std::size_t r = 0; r < p.height; ++r)
      for (std::size_t c = 0; c < p.width; ++c)
        for (std::size_t ch = 0; ch < 3; ++ch) o.at(r, x0 + c, ch) = p.at(r, c, ch);
    x0 += p.width;
  }
  return o;
}

void write_ppm(const std::filesystem::path& path, const OverlayImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> bytes(img.rgb.size());
  for (std::size_t i = 0; i < bytes.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(img.rgb[i], 0.0, 1.0) * 255.0));
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("write failed: " + path.string());
}

OverlayImage read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  std::string magic;
  int maxval = 0;
  OverlayImage img;
  is >> magic >> img.width >> img.height >> maxval;
  if (magic != "P6" || maxval != 255) throw DataError(path.string() + ": not an 8-bit P6 image");
  is.get();
  std::vector<unsigned char> bytes(3 * img.width * img.height);
  is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!is) throw DataError(path.string() + ": truncated image");
  img.rgb.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) img.rgb[i] = bytes[i] / 255.0;
  return img;
}

}  // namespace aqassess::cam
