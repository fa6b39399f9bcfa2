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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "aqassess/dsp/feature_cache.hpp"
#include "aqassess/dsp/features.hpp"
#include "aqassess/dsp/normalize.hpp"
#include "aqassess/rng.hpp"

using namespace aqassess;
using namespace aqassess::dsp;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed, double scale = 0.1) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = scale * rng.normal();
  return x;
}

std::vector<double> tone(double hz, double seconds, double sr = 16000.0) {
  std::vector<double> x(static_cast<std::size_t>(seconds * sr));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = 0.5 * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / sr);
  return x;
}

// Naive DFT power at bin k.
double dft_power(std::span<const double> x, std::size_t n_fft, std::size_t k) {
  double re = 0, im = 0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k * n) / static_cast<double>(n_fft);
    re += x[n] * std::cos(a);
    im += x[n] * std::sin(a);
  }
  return re * re + im * im;
}

}  // namespace

TEST(Framing, ThreeSecondsGiveThreeHundredFrames) {
  FrameSpec spec;
  const auto frames = frame_signal(std::vector<double>(48000, 0.1), spec);
  EXPECT_EQ(frames.rows, 300u);
  EXPECT_EQ(frames.cols, 400u);
}

TEST(Framing, OneSecondAndSilence) {
  FrameSpec spec;
  const auto frames = frame_signal(std::vector<double>(16000, 0.0), spec);
  EXPECT_EQ(frames.rows, 100u);
  for (double v : frames.values) EXPECT_EQ(v, 0.0);
}

TEST(Framing, CountIsCeilOfDurationOverHop) {
  FrameSpec spec;
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 160 + rng.below(200000);
    const std::size_t expect = n / 160 + (n % 160 != 0);
    EXPECT_EQ(frame_signal(std::vector<double>(n, 0.0), spec).rows, expect) << n;
  }
}

TEST(Framing, ShorterThanHopThrows) {
  EXPECT_THROW(frame_signal(std::vector<double>(159, 0.0), FrameSpec{}), std::invalid_argument);
}

TEST(Framing, AppliesHammingWindow) {
  FrameSpec spec;
  const auto frames = frame_signal(std::vector<double>(800, 1.0), spec);
  EXPECT_NEAR(frames.at(0, 0), 0.08, 1e-12);
  EXPECT_NEAR(frames.at(0, 399), 0.08, 1e-12);
  // last frame starts at 640; samples past 800 are padding
  EXPECT_EQ(frames.at(4, 200), 0.0);
}

TEST(Spectrum, MatchesNaiveDft) {
  const auto x = noise(400, 5);
  PowerSpectrum ps(2048);
  std::vector<double> p(1025);
  ps.compute(x, p);
  for (std::size_t k : {0u, 1u, 17u, 512u, 1024u})
    EXPECT_NEAR(p[k], dft_power(x, 2048, k), 1e-9 * (1.0 + p[k]));
}

TEST(Spectrum, Parseval) {
  FrameSpec spec;
  const auto frames = frame_signal(noise(4000, 6), spec);
  PowerSpectrum ps(spec.n_fft);
  std::vector<double> p(spec.n_bins());
  for (std::size_t f = 0; f < frames.rows; f += 5) {
    ps.compute(frames.row(f), p);
    double full = p.front() + p.back();
    for (std::size_t k = 1; k + 1 < p.size(); ++k) full += 2.0 * p[k];
    double energy = 0;
    for (double v : frames.row(f)) energy += v * v;
    EXPECT_NEAR(full / 2048.0, energy, 1e-9 * energy);
  }
}

TEST(MelFilterbank, ShapeUnimodalUnitPeak) {
  FrameSpec spec;
  const auto fb = mel_filterbank(spec);
  ASSERT_EQ(fb.rows, 128u);
  ASSERT_EQ(fb.cols, 1025u);
  for (std::size_t m = 0; m < fb.rows; ++m) {
    const auto row = fb.row(m);
    std::size_t k = 0;
    while (k + 1 < row.size() && row[k + 1] >= row[k]) ++k;
    EXPECT_DOUBLE_EQ(row[k], 1.0) << "filter " << m;
    for (; k + 1 < row.size(); ++k) EXPECT_LE(row[k + 1], row[k]) << "filter " << m;
    for (double v : row) EXPECT_GE(v, 0.0);
  }
}

TEST(MelFilterbank, CentersIncreaseAndSpanToNyquist) {
  FrameSpec spec;
  const auto c = mel_center_bins(spec);
  ASSERT_EQ(c.size(), 128u);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c[i], c[i - 1]);
  EXPECT_LT(c.back(), 1024u);
  EXPECT_NEAR(hz_to_mel(mel_to_hz(1234.5)), 1234.5, 1e-9);
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12);
}

TEST(MelFilterbank, TooManyFiltersThrows) {
  FrameSpec spec;
  spec.n_mels = 2000;
  EXPECT_THROW(mel_filterbank(spec), std::invalid_argument);
}

TEST(LogMel, ShapeOfThreeSeconds) {
  const auto f = log_mel(noise(48000, 2), FrameSpec{});
  EXPECT_EQ(f.frames(), 300u);
  EXPECT_EQ(f.dims(), 128u);
  EXPECT_EQ(f.kind, FeatureKind::logmel128);
}

TEST(LogMel, SilenceIsFloor) {
  const auto f = log_mel(std::vector<double>(16000, 0.0), FrameSpec{});
  for (double v : f.values.values) EXPECT_DOUBLE_EQ(v, std::log(kLogFloor));
}

TEST(LogMel, ToneArgmaxSitsAtOneKilohertz) {
  FrameSpec spec;
  const auto f = log_mel(tone(1000.0, 1.0), spec);
  const auto centers = mel_center_bins(spec);
  std::size_t first = 0;
  for (std::size_t t = 0; t + 3 < f.frames(); ++t) {
    const auto row = f.values.row(t);
    const auto arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    if (t == 0) first = arg;
    EXPECT_EQ(arg, first) << "frame " << t;
  }
  const double hz = static_cast<double>(centers[first]) * spec.sample_rate / spec.n_fft;
  EXPECT_NEAR(hz, 1000.0, 60.0);
}

TEST(LogMel, AmplitudeShiftIsTwoLogAlpha) {
  FrameSpec spec;
  const auto x = noise(8000, 9);
  for (double alpha : {0.3, 2.0, 7.5}) {
    std::vector<double> y(x);
    for (auto& v : y) v *= alpha;
    const auto a = log_mel(x, spec), b = log_mel(y, spec);
    const double floor = std::log(kLogFloor);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < a.values.values.size(); ++i) {
      if (a.values.values[i] <= floor + 1.0 || b.values.values[i] <= floor + 1.0) continue;
      EXPECT_NEAR(b.values.values[i] - a.values.values[i], 2.0 * std::log(alpha), 1e-9);
      ++checked;
    }
    EXPECT_GT(checked, a.values.values.size() / 2);
  }
}

TEST(Dct, Orthonormal) {
  const auto d = dct_matrix(13, 128);
  for (std::size_t i = 0; i < 13; ++i)
    for (std::size_t j = 0; j < 13; ++j) {
      double s = 0;
      for (std::size_t n = 0; n < 128; ++n) s += d.at(i, n) * d.at(j, n);
      EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(Mfcc, ThirtyNineDimsAndSilenceC0) {
  const auto f = mfcc(std::vector<double>(16000, 0.0), FrameSpec{});
  ASSERT_EQ(f.dims(), 39u);
  EXPECT_EQ(f.kind, FeatureKind::mfcc39);
  for (std::size_t t = 0; t < f.frames(); ++t) {
    EXPECT_NEAR(f.values.at(t, 0), std::sqrt(128.0) * std::log(kLogFloor), 1e-9);
    for (std::size_t c = 1; c < 13; ++c) EXPECT_NEAR(f.values.at(t, c), 0.0, 1e-9);
    for (std::size_t c = 13; c < 39; ++c) EXPECT_NEAR(f.values.at(t, c), 0.0, 1e-9);
  }
  EXPECT_EQ(mfcc(noise(48000, 1), FrameSpec{}).dims(), 39u);
}

TEST(Mfcc, MatchesDctOfLogMel) {
  const auto lm = log_mel(noise(4800, 4), FrameSpec{});
  const auto mf = mfcc_from_log_mel(lm);
  const auto d = dct_matrix(13, 128);
  for (std::size_t t = 0; t < lm.frames(); t += 7)
    for (std::size_t c = 0; c < 13; ++c) {
      double s = 0;
      for (std::size_t n = 0; n < 128; ++n) s += d.at(c, n) * lm.values.at(t, n);
      EXPECT_NEAR(mf.values.at(t, c), s, 1e-9);
    }
}

TEST(Deltas, RampConstantAndSingleRow) {
  Matrix ramp(10, 2);
  for (std::size_t t = 0; t < 10; ++t) {
    ramp.at(t, 0) = 3.0 * static_cast<double>(t) + 1.0;
    ramp.at(t, 1) = -0.5 * static_cast<double>(t);
  }
  const auto d = deltas(ramp);
  for (std::size_t t = 2; t < 8; ++t) {
    EXPECT_NEAR(d.at(t, 0), 3.0, 1e-12);
    EXPECT_NEAR(d.at(t, 1), -0.5, 1e-12);
  }
  // edge replication at t=0: (1*(m1-m0) + 2*(m2-m0)) / 10
  EXPECT_NEAR(d.at(0, 0), (3.0 + 2.0 * 6.0) / 10.0, 1e-12);

  Matrix flat(6, 3, 2.5);
  for (double v : deltas(flat).values) EXPECT_EQ(v, 0.0);
  Matrix one(1, 4, 7.0);
  for (double v : deltas(one).values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(deltas(Matrix(0, 3)), std::invalid_argument);
  EXPECT_THROW(deltas(flat, 0), std::invalid_argument);
}

TEST(Mfcc, ConstantLogMelGivesZeroDeltas) {
  FeatureMatrix lm;
  lm.values = Matrix(20, 128, -3.0);
  const auto mf = mfcc_from_log_mel(lm);
  for (std::size_t t = 0; t < 20; ++t)
    for (std::size_t c = 13; c < 39; ++c) EXPECT_EQ(mf.values.at(t, c), 0.0);
}

TEST(Normalize, PooledMeanZeroVarianceOne) {
  std::vector<FeatureMatrix> train;
  for (std::uint64_t s = 0; s < 3; ++s) train.push_back(log_mel(noise(3200 + 800 * s, s + 40), FrameSpec{}));
  const auto stats = fit_norm(std::span<const FeatureMatrix>(train), 2);
  EXPECT_EQ(stats.fitted_on, 2);
  std::vector<double> sum(128), sq(128);
  std::size_t n = 0;
  for (const auto& f : train) {
    const auto g = apply_norm(f, stats);
    for (std::size_t t = 0; t < g.frames(); ++t, ++n)
      for (std::size_t d = 0; d < 128; ++d) {
        sum[d] += g.values.at(t, d);
        sq[d] += g.values.at(t, d) * g.values.at(t, d);
      }
  }
  for (std::size_t d = 0; d < 128; ++d) {
    const double mean = sum[d] / n;
    EXPECT_NEAR(mean, 0.0, 1e-6);
    EXPECT_NEAR(sq[d] / n - mean * mean, stats.variance[d] / (stats.variance[d] + kNormEps), 1e-6);
    EXPECT_NEAR(sq[d] / n - mean * mean, 1.0, 1e-6);
  }
  const auto test = apply_norm(log_mel(noise(4800, 99), FrameSpec{}), stats);
  for (double v : test.values.values) EXPECT_TRUE(std::isfinite(v));
  const auto back = norm_from_json(to_json(stats));
  EXPECT_EQ(back.mean, stats.mean);
  EXPECT_EQ(back.variance, stats.variance);
}

TEST(Normalize, MismatchesThrow) {
  std::vector<FeatureMatrix> mf{mfcc(noise(3200, 3), FrameSpec{})};
  const auto stats = fit_norm(std::span<const FeatureMatrix>(mf));
  EXPECT_THROW(apply_norm(log_mel(noise(3200, 3), FrameSpec{}), stats), std::invalid_argument);
  EXPECT_THROW(fit_norm(std::span<const FeatureMatrix>{}), std::invalid_argument);
}

TEST(Topic, OneHotColumns) {
  const auto lm = log_mel(noise(3200, 8), FrameSpec{});
  const auto m1 = attach_topic_frames(lm, 1);
  ASSERT_EQ(m1.cols, 137u);
  const auto m9 = attach_topic_frames(lm, 9);
  for (std::size_t t = 0; t < lm.frames(); ++t) {
    for (std::size_t c = 0; c < 128; ++c) EXPECT_EQ(m1.at(t, c), lm.values.at(t, c));
    EXPECT_EQ(m1.at(t, 128), 1.0);
    for (std::size_t c = 129; c < 137; ++c) EXPECT_EQ(m1.at(t, c), 0.0);
    EXPECT_EQ(m9.at(t, 136), 1.0);
    for (std::size_t c = 128; c < 136; ++c) EXPECT_EQ(m9.at(t, c), 0.0);
  }
  EXPECT_THROW(attach_topic_frames(lm, 0), std::invalid_argument);
  EXPECT_THROW(attach_topic_frames(lm, 10), std::invalid_argument);
}

TEST(FeatureCache, ByteLayoutAndRoundTrip) {
  FeatureMatrix f;
  f.kind = FeatureKind::mfcc39;
  f.values = Matrix(2, 3);
  f.values.values = {1.0, -2.5, 0.1, 3.0, 1e-3, 7.0};
  std::stringstream ss;
  write_feature_cache(ss, f);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 1 + 1 + 4 + 4 + 6 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "AQFX");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 2);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 2);
  EXPECT_EQ(bytes[7] | bytes[8] | bytes[9], 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[10]), 3);
  // 1.0f = 0x3f800000 little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[17]), 0x3f);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 0x80);

  const auto back = read_feature_cache(ss);
  EXPECT_EQ(back.kind, FeatureKind::mfcc39);
  ASSERT_EQ(back.frames(), 2u);
  ASSERT_EQ(back.dims(), 3u);
  for (std::size_t i = 0; i < 6; ++i)
    EXPECT_EQ(back.values.values[i], static_cast<double>(static_cast<float>(f.values.values[i])));

  std::stringstream bad("AQFY\x01\x01");
  EXPECT_ANY_THROW(read_feature_cache(bad));
}
