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

#include <fstream>
#include <set>
#include <sstream>

#include "aqassess/corpus/corpus.hpp"
#include "aqassess/error.hpp"
#include "json.hpp"

namespace aqassess::corpus {

using nlohmann::json;

std::string to_string(Segmentation s) { return s == Segmentation::manual ? "manual" : "fixed3s"; }

Segmentation parse_segmentation(const std::string& s) {
  if (s == "manual") return Segmentation::manual;
  if (s == "fixed3s" || s == "fixed") return Segmentation::fixed3s;
  throw UsageError("unknown segmentation '" + s + "' (expected manual or fixed3s)");
}

namespace {

SpeakerRecord parse_record(const json& j, const std::filesystem::path& base) {
  SpeakerRecord r;
  r.speaker_id = j.at("speaker_id").get<std::string>();
  if (r.speaker_id.empty()) throw DataError("empty speaker_id");
  r.aq = j.at("aq").get<double>();
  if (!(r.aq >= 0.0 && r.aq <= 100.0)) throw DataError("AQ out of range [0, 100]");
  for (const auto& jr : j.at("recordings")) {
    Recording rec;
    std::filesystem::path p = jr.at("path").get<std::string>();
    rec.path = p.is_absolute() ? p : base / p;
    rec.topic_id = jr.at("topic_id").get<int>();
    if (rec.topic_id < 1 || rec.topic_id > kNumTopics)
      throw DataError("topic_id " + std::to_string(rec.topic_id) + " outside 1..9");
    if (jr.contains("boundaries") && !jr.at("boundaries").is_null()) {
      auto b = jr.at("boundaries").get<std::vector<double>>();
      for (std::size_t i = 1; i < b.size(); ++i)
        if (!(b[i] > b[i - 1])) throw DataError("boundaries must be strictly increasing");
      if (!b.empty() && b.front() < 0) throw DataError("negative boundary");
      rec.boundaries = std::move(b);
    }
    r.recordings.push_back(std::move(rec));
  }
  return r;
}

}  // namespace

std::vector<SpeakerRecord> load_manifest(const std::filesystem::path& path,
                                         std::vector<ManifestIssue>* issues) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<SpeakerRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SpeakerRecord r;
    try {
      r = parse_record(json::parse(line), base);
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!seen.insert(r.speaker_id).second)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate speaker id '" +
                      r.speaker_id + "'");
    for (auto& rec : r.recordings) {
      if (!std::filesystem::exists(rec.path)) {
        rec.missing = true;
        if (issues) issues->push_back({lineno, "missing audio file " + rec.path.string()});
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<SpeakerRecord>& records) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  const auto base = path.parent_path();
  for (const auto& r : records) {
    json j;
    j["speaker_id"] = r.speaker_id;
    j["aq"] = r.aq;
    j["recordings"] = json::array();
    for (const auto& rec : r.recordings) {
      json jr;
      jr["path"] = rec.path.lexically_relative(base).generic_string();
      jr["topic_id"] = rec.topic_id;
      if (rec.boundaries) jr["boundaries"] = *rec.boundaries;
      j["recordings"].push_back(jr);
    }
    os << j.dump() << '\n';
  }
}

}  // namespace aqassess::corpus
