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
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace aqassess::dsp {

/// Short-time analysis settings.
struct FrameSpec {
  double window_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t n_fft = 2048;
  std::size_t n_mels = 128;
  double sample_rate = 16000.0;

  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  std::size_t n_bins() const { return n_fft / 2 + 1; }
  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

/// Dense row-major real matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

enum class FeatureKind : std::uint8_t { logmel128 = 1, mfcc39 = 2 };

std::string to_string(FeatureKind k);
FeatureKind parse_feature_kind(const std::string& s);  // "logmel" | "mfcc"
std::size_t feature_dims(FeatureKind k);

/// Time x frequency features of one utterance.
struct FeatureMatrix {
  Matrix values;
  FeatureKind kind = FeatureKind::logmel128;
  FrameSpec frame_spec;

  std::size_t frames() const { return values.rows; }
  std::size_t dims() const { return values.cols; }
};

inline constexpr double kLogFloor = 1e-10;
inline constexpr std::size_t kCepstra = 13;

/// Number of frames for `n_samples` under tail padding: ceil(n / hop).
std::size_t frame_count(std::size_t n_samples, const FrameSpec& spec);

std::vector<double> hamming_window(std::size_t n);

/// Hamming-windowed frames [n_frames x window_samples]; frames running past
/// the end are zero-padded.
Matrix frame_signal(std::span<const double> samples, const FrameSpec& spec);

/// Power spectrum |X_k|^2 of real frames zero-padded to n_fft, k = 0..n_fft/2.
class PowerSpectrum {
 public:
  explicit PowerSpectrum(std::size_t n_fft);
  ~PowerSpectrum();
  PowerSpectrum(const PowerSpectrum&) = delete;
  PowerSpectrum& operator=(const PowerSpectrum&) = delete;

  std::size_t n_fft() const { return n_fft_; }
  /// `frame` may be shorter than n_fft; `out` must hold n_fft/2 + 1 values.
  void compute(std::span<const double> frame, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_fft_;
  std::unique_ptr<Impl> impl_;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters [n_mels x (n_fft/2+1)] with centers uniformly spaced on
/// the Mel scale between 0 Hz and Nyquist; edges and centers snap to FFT bins
/// so every filter peaks at exactly 1. Throws when adjacent points collide.
Matrix mel_filterbank(const FrameSpec& spec);

/// FFT bin index of each filter's center.
std::vector<std::size_t> mel_center_bins(const FrameSpec& spec);

FeatureMatrix log_mel(std::span<const double> samples, const FrameSpec& spec);

/// Orthonormal DCT-II rows 0..n_out-1 for inputs of length n_in.
Matrix dct_matrix(std::size_t n_out, std::size_t n_in);

/// Cepstra from log-Mel frames followed by deltas and delta-deltas.
FeatureMatrix mfcc_from_log_mel(const FeatureMatrix& logmel);
FeatureMatrix mfcc(std::span<const double> samples, const FrameSpec& spec);

/// Regression deltas with edge replication.
Matrix deltas(const Matrix& m, std::size_t span = 2);

/// Appends the 9-way one-hot topic vector to every frame of a log-Mel matrix.
Matrix attach_topic_frames(const FeatureMatrix& f, int topic_id);

}  // namespace aqassess::dsp
