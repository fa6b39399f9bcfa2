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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aqassess::corpus {

inline constexpr double kTargetRate = 16000.0;
inline constexpr double kDefaultAqThreshold = 90.0;
inline constexpr int kNumTopics = 9;

struct Recording {
  std::filesystem::path path;  // resolved against the manifest directory
  int topic_id = 1;
  std::optional<std::vector<double>> boundaries;  // seconds
  bool missing = false;                           // audio file absent at load time
};

struct SpeakerRecord {
  std::string speaker_id;
  double aq = 0.0;
  std::vector<Recording> recordings;
};

inline int label_for_aq(double aq, double threshold = kDefaultAqThreshold) {
  return aq >= threshold ? 1 : 0;
}

enum class Segmentation { manual, fixed3s };
std::string to_string(Segmentation s);
Segmentation parse_segmentation(const std::string& s);

struct Utterance {
  std::string id;  // "{speaker}-r{recording}-{segment}"
  std::string speaker_id;
  std::vector<double> samples;
  double sample_rate = kTargetRate;
  int topic_id = 1;
  int label = 0;
  Segmentation source = Segmentation::fixed3s;
  std::size_t recording_index = 0;
  std::size_t segment_index = 0;
  double start_s = 0.0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// ---- audio ---------------------------------------------------------------

struct Audio {
  std::vector<double> samples;  // mono, [-1, 1]
  double sample_rate = kTargetRate;
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Reads 16-bit PCM RIFF WAV; multi-channel input is averaged to mono.
Audio read_wav(const std::filesystem::path& path);
/// Linear-interpolation resampling.
Audio resample(const Audio& in, double target_rate);
/// read_wav followed by resampling to 16 kHz when needed.
Audio load_audio(const std::filesystem::path& path);
/// Writes 16-bit PCM mono.
void write_wav(const std::filesystem::path& path, const Audio& audio);

// ---- manifest ------------------------------------------------------------

struct ManifestIssue {
  std::size_t line = 0;
  std::string message;
};

/// One JSON object per line:
///   {"speaker_id": "...", "aq": 94.7,
///    "recordings": [{"path": "...", "topic_id": 1, "boundaries": [0, 2.5]}]}
/// Missing audio files are flagged on the record and reported in `issues`;
/// every other defect throws DataError naming the line.
std::vector<SpeakerRecord> load_manifest(const std::filesystem::path& path,
                                         std::vector<ManifestIssue>* issues = nullptr);
void write_manifest(const std::filesystem::path& path, const std::vector<SpeakerRecord>& records);

// ---- segmentation --------------------------------------------------------

/// One utterance per interval between consecutive boundaries.
std::vector<Utterance> segment_manual(const SpeakerRecord& speaker, std::size_t recording,
                                      const Audio& audio,
                                      double aq_threshold = kDefaultAqThreshold);

/// Non-overlapping windows from t = 0; the trailing remainder is dropped.
std::vector<Utterance> segment_fixed(const SpeakerRecord& speaker, std::size_t recording,
                                     const Audio& audio, double window_s = 3.0,
                                     double aq_threshold = kDefaultAqThreshold);

/// Loads every non-missing recording and segments it.
std::vector<Utterance> segment_corpus(const std::vector<SpeakerRecord>& speakers,
                                      Segmentation mode,
                                      double aq_threshold = kDefaultAqThreshold);

// ---- folds ---------------------------------------------------------------

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;
};

struct FoldPlan {
  std::size_t k = 5;
  double valid_frac = 0.1;
  std::uint64_t seed = 0;
  double aq_threshold = kDefaultAqThreshold;
  std::vector<Fold> folds;
};

/// Label-stratified speaker-level k-fold plan with a validation carve-out
/// taken from each fold's training speakers.
FoldPlan make_folds(const std::vector<SpeakerRecord>& speakers, std::size_t k, double valid_frac,
                    std::uint64_t seed, double aq_threshold = kDefaultAqThreshold);

std::string to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const std::string& text);
void save_fold_plan(const std::filesystem::path& path, const FoldPlan& plan);
FoldPlan load_fold_plan(const std::filesystem::path& path);

// ---- synthetic corpus ----------------------------------------------------

/// Class contrasts of the synthetic generator. Label-1 speakers talk in long
/// bursts with short pauses and swept formants; label-0 speakers pause long,
/// switch rarely and hold formants flat.
struct SynthProfile {
  double recording_seconds = 21.0;
  std::size_t recordings_per_speaker = 3;
  // {min, max} burst and pause durations in seconds, per label.
  double high_burst[2] = {0.5, 1.3};
  double high_pause[2] = {0.05, 0.25};
  double low_burst[2] = {0.3, 0.8};
  double low_pause[2] = {0.7, 2.0};
  double high_sweep_hz = 350.0;  // F1 sweep depth for label 1
  double low_sweep_hz = 10.0;
  double noise_floor = 0.002;
  double speaker_jitter = 0.15;  // relative duration jitter per speaker
};

/// Writes `audio/*.wav` and `manifest.jsonl` under `out_dir`; speaker i is
/// High-AQ when i is even.
std::vector<SpeakerRecord> synth_corpus(std::size_t n_speakers, const SynthProfile& profile,
                                        std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace aqassess::corpus
