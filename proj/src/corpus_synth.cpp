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
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "aqassess/corpus/corpus.hpp"
#include "aqassess/error.hpp"
#include "aqassess/rng.hpp"

namespace aqassess::corpus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kBlock = 64;  // samples between envelope updates
constexpr double kMaxHarmonicHz = 5000.0;

struct Formants {
  std::array<double, 3> base;
  std::array<double, 3> depth;
  double rate_hz;
  double phase;
};

double formant_gain(double f, const std::array<double, 3>& centers) {
  static constexpr std::array<double, 3> kBw{90.0, 130.0, 180.0};
  static constexpr std::array<double, 3> kGain{1.0, 0.55, 0.3};
  double g = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = (f - centers[i]) / kBw[i];
    g += kGain[i] * std::exp(-0.5 * d * d);
  }
  return g;
}

/// Adds one voiced burst into `out` starting at `start`.
void render_burst(std::vector<double>& out, std::size_t start, std::size_t length, double f0,
                  const Formants& fm, double sr) {
  const std::size_t ramp = static_cast<std::size_t>(0.015 * sr);
  double phase = 0;
  std::vector<double> amp;
  for (std::size_t b = 0; b < length; b += kBlock) {
    const double t = static_cast<double>(b) / sr;
    const double f0_t = f0 * (1.0 + 0.03 * std::sin(kTwoPi * 1.7 * t)) * (1.0 - 0.05 * t);
    std::array<double, 3> centers;
    for (std::size_t i = 0; i < 3; ++i)
      centers[i] = fm.base[i] + fm.depth[i] * std::sin(kTwoPi * fm.rate_hz * t + fm.phase + i);
    const auto n_harm = static_cast<std::size_t>(kMaxHarmonicHz / f0_t);
    amp.assign(n_harm, 0.0);
    double norm = 0;
    for (std::size_t k = 0; k < n_harm; ++k) {
      amp[k] = formant_gain(f0_t * static_cast<double>(k + 1), centers) /
               std::sqrt(static_cast<double>(k + 1));
      norm += amp[k];
    }
    const double scale = norm > 0 ? 0.35 / norm : 0.0;
    const double dphi = kTwoPi * f0_t / sr;
    const std::size_t end = std::min(length, b + kBlock);
    for (std::size_t i = b; i < end; ++i) {
      const std::complex<double> z(std::cos(phase), std::sin(phase));
      std::complex<double> w = z;
      double acc = 0;
      for (std::size_t k = 0; k < n_harm; ++k) {
        acc += amp[k] * w.imag();
        w *= z;
      }
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / ramp);
      if (length - i < ramp)
        env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(length - i) / ramp));
      out[start + i] += scale * env * acc;
      phase += dphi;
      if (phase > kTwoPi) phase -= kTwoPi;
    }
  }
}

double draw(Rng& rng, const double (&range)[2], double jitter) {
  return rng.uniform(range[0], range[1]) * jitter;
}

}  // namespace

std::vector<SpeakerRecord> synth_corpus(std::size_t n_speakers, const SynthProfile& profile,
                                        std::uint64_t seed, const std::filesystem::path& out_dir) {
  if (n_speakers < 4) throw UsageError("synth_corpus: too few speakers for folds (need >= 4)");
  if (profile.recordings_per_speaker < 1 || profile.recordings_per_speaker > 9)
    throw UsageError("synth_corpus: recordings per speaker must be in 1..9");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "audio", ec);
  if (ec) throw DataError("cannot create " + (out_dir / "audio").string() + ": " + ec.message());

  const double sr = kTargetRate;
  std::vector<SpeakerRecord> records;
  for (std::size_t s = 0; s < n_speakers; ++s) {
    Rng rng(derive_seed(seed, s));
    const bool high = s % 2 == 0;
    SpeakerRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "spk%03zu", s + 1);
    rec.speaker_id = id;
    rec.aq = high ? std::round(rng.uniform(90.0, 100.0) * 10.0) / 10.0
                  : std::round(rng.uniform(30.0, 89.0) * 10.0) / 10.0;
    const double jitter = 1.0 + profile.speaker_jitter * (2.0 * rng.uniform() - 1.0);
    const double f0 = rng.uniform(100.0, 220.0);
    std::vector<int> topics{1, 2, 3, 4, 5, 6, 7, 8, 9};
    rng.shuffle(topics);

    for (std::size_t r = 0; r < profile.recordings_per_speaker; ++r) {
      Audio audio;
      audio.sample_rate = sr;
      const auto n = static_cast<std::size_t>(std::lround(profile.recording_seconds * sr));
      audio.samples.assign(n, 0.0);
      std::vector<double> bounds{0.0};
      const auto& burst = high ? profile.high_burst : profile.low_burst;
      const auto& pause = high ? profile.high_pause : profile.low_pause;
      double t = 0.5 * draw(rng, pause, jitter);
      std::size_t in_sentence = 0;
      std::size_t sentence_len = 2 + rng.below(3);
      while (t < profile.recording_seconds - 0.1) {
        const double d = std::min(draw(rng, burst, jitter), profile.recording_seconds - t);
        Formants fm;
        fm.base = {rng.uniform(400, 700), rng.uniform(1100, 1900), rng.uniform(2400, 2900)};
        const double depth = high ? profile.high_sweep_hz : profile.low_sweep_hz;
        fm.depth = {depth, 2.0 * depth, 0.5 * depth};
        fm.rate_hz = rng.uniform(3.0, 6.0);
        fm.phase = rng.uniform(0.0, kTwoPi);
        const auto start = static_cast<std::size_t>(t * sr);
        const auto len = std::min(n - start, static_cast<std::size_t>(d * sr));
        render_burst(audio.samples, start, len, f0 * rng.uniform(0.92, 1.08), fm, sr);
        t += d;
        const double p = draw(rng, pause, jitter);
        if (++in_sentence >= sentence_len && t + p < profile.recording_seconds - 0.1) {
          bounds.push_back(t + 0.5 * p);
          in_sentence = 0;
          sentence_len = 2 + rng.below(3);
        }
        t += p;
      }
      bounds.push_back(static_cast<double>(n) / sr);
      for (auto& x : audio.samples) x += profile.noise_floor * rng.normal();

      Recording out;
      out.path = out_dir / "audio" / (rec.speaker_id + "_r" + std::to_string(r + 1) + ".wav");
      out.topic_id = topics[r];
      out.boundaries = std::move(bounds);
      write_wav(out.path, audio);
      rec.recordings.push_back(std::move(out));
    }
    records.push_back(std::move(rec));
  }
  write_manifest(out_dir / "manifest.jsonl", records);
  return records;
}

}  // namespace aqassess::corpus
