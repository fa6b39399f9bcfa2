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

#include "aqassess/dsp/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aqassess::dsp {

std::size_t FrameSpec::window_samples() const {
  return static_cast<std::size_t>(std::lround(window_ms * sample_rate / 1000.0));
}

std::size_t FrameSpec::hop_samples() const {
  return static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FrameSpec::validate() const {
  if (!(hop_ms > 0) || !(window_ms > hop_ms))
    throw std::invalid_argument("frame spec: need window_ms > hop_ms > 0");
  if (!(sample_rate > 0)) throw std::invalid_argument("frame spec: sample rate must be positive");
  if (n_fft < window_samples()) throw std::invalid_argument("frame spec: n_fft shorter than window");
  if (n_mels < 1) throw std::invalid_argument("frame spec: n_mels must be >= 1");
}

std::string to_string(FeatureKind k) { return k == FeatureKind::logmel128 ? "logmel" : "mfcc"; }

FeatureKind parse_feature_kind(const std::string& s) {
  if (s == "logmel" || s == "logmel128") return FeatureKind::logmel128;
  if (s == "mfcc" || s == "mfcc39") return FeatureKind::mfcc39;
  throw std::invalid_argument("unknown feature kind '" + s + "' (expected logmel or mfcc)");
}

std::size_t feature_dims(FeatureKind k) { return k == FeatureKind::logmel128 ? 128 : 39; }

std::size_t frame_count(std::size_t n_samples, const FrameSpec& spec) {
  const std::size_t hop = spec.hop_samples();
  return (n_samples + hop - 1) / hop;
}

std::vector<double> hamming_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  return w;
}

Matrix frame_signal(std::span<const double> samples, const FrameSpec& spec) {
  spec.validate();
  const std::size_t hop = spec.hop_samples(), win = spec.window_samples();
  if (samples.size() < hop)
    throw std::invalid_argument("frame_signal: utterance shorter than one hop (" +
                                std::to_string(samples.size()) + " samples)");
  const std::size_t n = frame_count(samples.size(), spec);
  const auto window = hamming_window(win);
  Matrix frames(n, win);
  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < win && start + i < samples.size(); ++i)
      frames.at(f, i) = samples[start + i] * window[i];
  }
  return frames;
}

struct PowerSpectrum::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

PowerSpectrum::PowerSpectrum(std::size_t n_fft) : n_fft_(n_fft), impl_(std::make_unique<Impl>()) {
  if (n_fft < 2) throw std::invalid_argument("power spectrum: n_fft must be >= 2");
  impl_->in = fftw_alloc_real(n_fft);
  impl_->out = fftw_alloc_complex(n_fft / 2 + 1);
  impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), impl_->in, impl_->out, FFTW_ESTIMATE);
}

PowerSpectrum::~PowerSpectrum() {
  fftw_destroy_plan(impl_->plan);
  fftw_free(impl_->in);
  fftw_free(impl_->out);
}

void PowerSpectrum::compute(std::span<const double> frame, std::span<double> out) {
  if (frame.size() > n_fft_) throw std::invalid_argument("power spectrum: frame longer than n_fft");
  if (out.size() != n_fft_ / 2 + 1) throw std::invalid_argument("power spectrum: bad output size");
  std::copy(frame.begin(), frame.end(), impl_->in);
  std::fill(impl_->in + frame.size(), impl_->in + n_fft_, 0.0);
  fftw_execute(impl_->plan);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = impl_->out[k][0] * impl_->out[k][0] + impl_->out[k][1] * impl_->out[k][1];
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<std::size_t> mel_points(const FrameSpec& spec) {
  spec.validate();
  const double top = hz_to_mel(spec.sample_rate / 2.0);
  std::vector<std::size_t> bins(spec.n_mels + 2);
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double hz = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(spec.n_mels + 1));
    bins[i] = static_cast<std::size_t>(std::lround(hz * static_cast<double>(spec.n_fft) / spec.sample_rate));
  }
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (bins[i] <= bins[i - 1])
      throw std::invalid_argument("mel filterbank: " + std::to_string(spec.n_mels) +
                                  " filters are too many for n_fft " + std::to_string(spec.n_fft) +
                                  " (adjacent centers collide)");
  return bins;
}

}  // namespace

std::vector<std::size_t> mel_center_bins(const FrameSpec& spec) {
  auto p = mel_points(spec);
  return {p.begin() + 1, p.end() - 1};
}

Matrix mel_filterbank(const FrameSpec& spec) {
  const auto p = mel_points(spec);
  Matrix fb(spec.n_mels, spec.n_bins());
  for (std::size_t m = 0; m < spec.n_mels; ++m) {
    const std::size_t lo = p[m], c = p[m + 1], hi = p[m + 2];
    for (std::size_t k = lo; k <= hi && k < fb.cols; ++k) {
      fb.at(m, k) = k <= c ? static_cast<double>(k - lo) / static_cast<double>(c - lo)
                           : static_cast<double>(hi - k) / static_cast<double>(hi - c);
    }
  }
  return fb;
}

FeatureMatrix log_mel(std::span<const double> samples, const FrameSpec& spec) {
  const Matrix frames = frame_signal(samples, spec);
  const Matrix fb = mel_filterbank(spec);
  PowerSpectrum ps(spec.n_fft);
  std::vector<double> power(spec.n_bins());
  FeatureMatrix out;
  out.kind = FeatureKind::logmel128;
  out.frame_spec = spec;
  out.values = Matrix(frames.rows, spec.n_mels);
  for (std::size_t f = 0; f < frames.rows; ++f) {
    ps.compute(frames.row(f), power);
    for (std::size_t m = 0; m < spec.n_mels; ++m) {
      const auto w = fb.row(m);
      double e = 0;
      for (std::size_t k = 0; k < power.size(); ++k) e += w[k] * power[k];
      out.values.at(f, m) = std::log(std::max(e, kLogFloor));
    }
  }
  return out;
}

Matrix dct_matrix(std::size_t n_out, std::size_t n_in) {
  Matrix d(n_out, n_in);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n_in));
    for (std::size_t n = 0; n < n_in; ++n)
      d.at(k, n) = s * std::cos(std::numbers::pi * static_cast<double>(k) *
                                (2.0 * static_cast<double>(n) + 1.0) / (2.0 * static_cast<double>(n_in)));
  }
  return d;
}

Matrix deltas(const Matrix& m, std::size_t span) {
  if (span < 1) throw std::invalid_argument("deltas: span must be >= 1");
  if (m.rows < 1) throw std::invalid_argument("deltas: matrix has no rows");
  double denom = 0;
  for (std::size_t d = 1; d <= span; ++d) denom += static_cast<double>(d * d);
  denom *= 2;
  Matrix out(m.rows, m.cols);
  const long last = static_cast<long>(m.rows) - 1;
  for (long t = 0; t <= last; ++t) {
    for (std::size_t d = 1; d <= span; ++d) {
      const auto fwd = static_cast<std::size_t>(std::min(t + static_cast<long>(d), last));
      const auto bwd = static_cast<std::size_t>(std::max(t - static_cast<long>(d), 0L));
      for (std::size_t c = 0; c < m.cols; ++c)
        out.at(static_cast<std::size_t>(t), c) +=
            static_cast<double>(d) * (m.at(fwd, c) - m.at(bwd, c));
    }
    for (std::size_t c = 0; c < m.cols; ++c) out.at(static_cast<std::size_t>(t), c) /= denom;
  }
  return out;
}

FeatureMatrix mfcc_from_log_mel(const FeatureMatrix& logmel) {
  if (logmel.kind != FeatureKind::logmel128)
    throw std::invalid_argument("mfcc: input must be log-Mel features");
  const Matrix dct = dct_matrix(kCepstra, logmel.dims());
  Matrix cep(logmel.frames(), kCepstra);
  for (std::size_t f = 0; f < logmel.frames(); ++f) {
    const auto x = logmel.values.row(f);
    for (std::size_t k = 0; k < kCepstra; ++k) {
      double acc = 0;
      const auto d = dct.row(k);
      for (std::size_t n = 0; n < x.size(); ++n) acc += d[n] * x[n];
      cep.at(f, k) = acc;
    }
  }
  const Matrix d1 = deltas(cep);
  const Matrix d2 = deltas(d1);
  FeatureMatrix out;
  out.kind = FeatureKind::mfcc39;
  out.frame_spec = logmel.frame_spec;
  out.values = Matrix(cep.rows, 3 * kCepstra);
  for (std::size_t f = 0; f < cep.rows; ++f)
    for (std::size_t k = 0; k < kCepstra; ++k) {
      out.values.at(f, k) = cep.at(f, k);
      out.values.at(f, kCepstra + k) = d1.at(f, k);
      out.values.at(f, 2 * kCepstra + k) = d2.at(f, k);
    }
  return out;
}

FeatureMatrix mfcc(std::span<const double> samples, const FrameSpec& spec) {
  return mfcc_from_log_mel(log_mel(samples, spec));
}

Matrix attach_topic_frames(const FeatureMatrix& f, int topic_id) {
  if (topic_id < 1 || topic_id > 9)
    throw std::invalid_argument("topic id " + std::to_string(topic_id) + " outside 1..9");
  Matrix out(f.frames(), f.dims() + 9);
  for (std::size_t r = 0; r < f.frames(); ++r) {
    std::copy(f.values.row(r).begin(), f.values.row(r).end(), out.row(r).begin());
    out.at(r, f.dims() + static_cast<std::size_t>(topic_id - 1)) = 1.0;
  }
  return out;
}

}  // namespace aqassess::dsp
