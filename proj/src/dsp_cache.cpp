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

#include "aqassess/dsp/feature_cache.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

#include "aqassess/binary_io.hpp"
#include "aqassess/error.hpp"

namespace aqassess::dsp {

void write_feature_cache(std::ostream& os, const FeatureMatrix& f) {
  if (f.frames() > std::numeric_limits<std::uint32_t>::max() ||
      f.dims() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("feature cache: matrix too large");
  os.write("AQFX", 4);
  io::put_u8(os, kFeatureCacheVersion);
  io::put_u8(os, static_cast<std::uint8_t>(f.kind));
  io::put_u32(os, static_cast<std::uint32_t>(f.frames()));
  io::put_u32(os, static_cast<std::uint32_t>(f.dims()));
  for (double v : f.values.values) io::put_f32(os, static_cast<float>(v));
}

FeatureMatrix read_feature_cache(std::istream& is) {
  io::expect_magic(is, "AQFX", "feature cache");
  const auto version = io::get_u8(is);
  if (version != kFeatureCacheVersion)
    throw DataError("feature cache: unsupported version " + std::to_string(version));
  const auto kind = io::get_u8(is);
  if (kind != static_cast<std::uint8_t>(FeatureKind::logmel128) &&
      kind != static_cast<std::uint8_t>(FeatureKind::mfcc39))
    throw DataError("feature cache: unknown kind byte " + std::to_string(kind));
  FeatureMatrix f;
  f.kind = static_cast<FeatureKind>(kind);
  const std::uint32_t rows = io::get_u32(is), cols = io::get_u32(is);
  f.values = Matrix(rows, cols);
  for (auto& v : f.values.values) v = io::get_f32(is);
  return f;
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  write_feature_cache(os, f);
  if (!os) throw DataError("write failed: " + path.string());
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("missing feature cache " + path.string());
  try {
    return read_feature_cache(is);
  } catch (const std::runtime_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace aqassess::dsp
