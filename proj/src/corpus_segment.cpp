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

#include <cmath>

#include "aqassess/corpus/corpus.hpp"
#include "aqassess/error.hpp"

namespace aqassess::corpus {

namespace {

Utterance make_utterance(const SpeakerRecord& spk, std::size_t rec, std::size_t seg,
                         const Audio& audio, std::size_t begin, std::size_t end,
                         Segmentation source, double threshold) {
  Utterance u;
  u.speaker_id = spk.speaker_id;
  u.id = spk.speaker_id + "-r" + std::to_string(rec + 1) + "-" + std::to_string(seg + 1);
  u.samples.assign(audio.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                   audio.samples.begin() + static_cast<std::ptrdiff_t>(end));
  u.sample_rate = audio.sample_rate;
  u.topic_id = spk.recordings.at(rec).topic_id;
  u.label = label_for_aq(spk.aq, threshold);
  u.source = source;
  u.recording_index = rec;
  u.segment_index = seg;
  u.start_s = static_cast<double>(begin) / audio.sample_rate;
  return u;
}

}  // namespace

std::vector<Utterance> segment_manual(const SpeakerRecord& speaker, std::size_t recording,
                                      const Audio& audio, double aq_threshold) {
  const auto& rec = speaker.recordings.at(recording);
  if (!rec.boundaries || rec.boundaries->empty())
    throw DataError(speaker.speaker_id + ": no boundaries for manual segmentation");
  const auto& b = *rec.boundaries;
  if (b.size() < 2) throw DataError(speaker.speaker_id + ": need at least two boundaries");
  const double duration = audio.duration();
  constexpr double kSlack = 1e-6;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i > 0 && !(b[i] > b[i - 1]))
      throw DataError(speaker.speaker_id + ": boundaries must be strictly increasing");
    if (b[i] < 0 || b[i] > duration + kSlack)
      throw DataError(speaker.speaker_id + ": boundary " + std::to_string(b[i]) +
                      " s outside audio of " + std::to_string(duration) + " s");
  }
  std::vector<Utterance> out;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const auto begin = static_cast<std::size_t>(std::lround(b[i] * audio.sample_rate));
    const auto end = std::min(audio.samples.size(),
                              static_cast<std::size_t>(std::lround(b[i + 1] * audio.sample_rate)));
    if (end <= begin) throw DataError(speaker.speaker_id + ": empty boundary interval");
    out.push_back(make_utterance(speaker, recording, i, audio, begin, end, Segmentation::manual,
                                 aq_threshold));
  }
  return out;
}

std::vector<Utterance> segment_fixed(const SpeakerRecord& speaker, std::size_t recording,
                                     const Audio& audio, double window_s, double aq_threshold) {
  if (audio.samples.empty()) throw DataError(speaker.speaker_id + ": empty audio");
  const auto win = static_cast<std::size_t>(std::lround(window_s * audio.sample_rate));
  if (win == 0) throw UsageError("segment window must be positive");
  std::vector<Utterance> out;
  for (std::size_t i = 0; (i + 1) * win <= audio.samples.size(); ++i)
    out.push_back(make_utterance(speaker, recording, i, audio, i * win, (i + 1) * win,
                                 Segmentation::fixed3s, aq_threshold));
  return out;
}

std::vector<Utterance> segment_corpus(const std::vector<SpeakerRecord>& speakers,
                                      Segmentation mode, double aq_threshold) {
  std::vector<Utterance> out;
  for (const auto& spk : speakers)
    for (std::size_t r = 0; r < spk.recordings.size(); ++r) {
      if (spk.recordings[r].missing) continue;
      const Audio audio = load_audio(spk.recordings[r].path);
      auto utts = mode == Segmentation::manual ? segment_manual(spk, r, audio, aq_threshold)
                                               : segment_fixed(spk, r, audio, 3.0, aq_threshold);
      for (auto& u : utts) out.push_back(std::move(u));
    }
  return out;
}

}  // namespace aqassess::corpus
