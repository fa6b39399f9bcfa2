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

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "aqassess/dsp/features.hpp"

namespace aqassess::dsp {

// Layout: "AQFX", version (u8), kind (u8), rows (u32 LE), cols (u32 LE),
// then rows*cols float32 LE values, row-major.
inline constexpr std::uint8_t kFeatureCacheVersion = 1;

void write_feature_cache(std::ostream& os, const FeatureMatrix& f);
FeatureMatrix read_feature_cache(std::istream& is);

void save_features(const std::filesystem::path& path, const FeatureMatrix& f);
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace aqassess::dsp
