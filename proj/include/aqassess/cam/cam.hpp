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
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "aqassess/dsp/features.hpp"
#include "aqassess/models/model.hpp"

namespace aqassess::cam {

enum class Sign { positive, negative };
std::string to_string(Sign s);
Sign parse_sign(const std::string& s);

inline constexpr const char* kDefaultLayer = "layer7";

/// Class-activation values at a tapped layer, rows = time, cols = frequency.
struct CamMap {
  dsp::Matrix values;
  Sign sign = Sign::positive;
  std::string layer;
  std::size_t z = 0;  // H * W of the tapped map
};

/// float64 copy of a CNN model; map arithmetic runs at this precision.
std::unique_ptr<models::Model<double>> to_double(models::Model<float>& model);

/// Sum over channels of head weight times feature map at `layer` (layer7
/// or layer8), no ReLU. Requires the plain CNN (GAP straight into the head).
CamMap cam(models::Model<double>& model, const dsp::FeatureMatrix& input,
           const std::string& layer = kDefaultLayer);

/// alpha_k = spatial mean of d(logit)/d(f_k); positive maps are
/// ReLU(sum_k alpha_k f_k), negative maps ReLU(-sum_k alpha_k f_k).
/// Any conv tap (layer1, 3, 5, 6, 7) or layer8 is accepted.
CamMap grad_cam(models::Model<double>& model, const dsp::FeatureMatrix& input,
                const std::string& layer, Sign sign, int topic_id = 1);

/// Both signs from one forward/backward pass.
struct CamPair {
  CamMap positive, negative;
  double logit = 0;
};
CamPair grad_cam_pair(models::Model<double>& model, const dsp::FeatureMatrix& input,
                      const std::string& layer, int topic_id = 1);

/// Bilinear interpolation with corner alignment.
dsp::Matrix upsample(const dsp::Matrix& map, std::size_t rows, std::size_t cols);

/// RGB image, channel values in [0, 1], row-major, row 0 at the top.
struct OverlayImage {
  std::size_t width = 0, height = 0;
  std::vector<double> rgb;  // 3 * width * height

  double& at(std::size_t row, std::size_t col, std::size_t ch) {
    return rgb[(row * width + col) * 3 + ch];
  }
  double at(std::size_t row, std::size_t col, std::size_t ch) const {
    return rgb[(row * width + col) * 3 + ch];
  }
};

/// Grayscale log-Mel (time across, low frequencies at the bottom) with the
/// positive map blended in red and the negative map in blue. The two maps
/// share one min-max normalisation. `neg` may be empty.
OverlayImage render_overlay(const dsp::Matrix& logmel, const dsp::Matrix& pos,
                            const dsp::Matrix& neg, double alpha = 0.4);

/// Map normalisation bounds; values outside are clamped.
struct MapRange {
  double lo = 0, hi = 0;
};
MapRange joint_range(const dsp::Matrix& pos, const dsp::Matrix& neg);
/// As above with given bounds, so separately rendered images share a scale.
OverlayImage render_overlay(const dsp::Matrix& logmel, const dsp::Matrix& pos,
                            const dsp::Matrix& neg, double alpha, MapRange range);

/// Panels side by side, top-aligned.
OverlayImage concat_horizontal(const std::vector<OverlayImage>& panels);

/// Binary PPM (P6), 8 bits per channel.
void write_ppm(const std::filesystem::path& path, const OverlayImage& img);
OverlayImage read_ppm(const std::filesystem::path& path);

}  // namespace aqassess::cam
