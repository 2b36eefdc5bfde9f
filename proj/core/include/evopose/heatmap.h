// Copyright 2026 The EvoPose Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EVOPOSE_HEATMAP_H_
#define EVOPOSE_HEATMAP_H_

#include <cstdint>
#include <vector>

#include "evopose/tensor.h"

namespace evopose {

inline constexpr double kHeatmapPeak = 255.0;

// Pixel coordinates: pixel (col, row) has its center at (col, row), so an
// image of width W spans [-0.5, W - 0.5].
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Keypoint&) const = default;
};

// Gaussian width in heatmap pixels.
inline double HeatmapSigma(int64_t heatmap_h) { return static_cast<double>(heatmap_h) / 64.0; }

// (h', w', K) targets: channel j is a 255-peak Gaussian around keypoint j
// when visibility[j] > 0, zero otherwise. Heatmap cell (u, v) covers the
// input region of width W / w' and height H / h'.
Tensor RenderTargets(const std::vector<Keypoint>& keypoints, const std::vector<int>& visibility,
                     int64_t image_h, int64_t image_w, int64_t heatmap_h, int64_t heatmap_w);

// Writes the targets of one sample into batch slot `n` of `out` (N, h', w', K).
void RenderTargetsInto(const std::vector<Keypoint>& keypoints,
                       const std::vector<int>& visibility, int64_t image_h, int64_t image_w,
                       Tensor& out, int64_t n);

// (1/K) * sum over visible j of ||pred_j - target_j||^2 for (h', w', K) maps.
double SampleLoss(const Tensor& pred, const Tensor& target, const std::vector<int>& visibility);

struct BatchLoss {
  double loss = 0.0;        // mean of per-sample losses
  std::vector<double> per_sample;
  Tensor grad;              // d loss / d pred
};

// Batched (N, h', w', K) version; visibility is N rows of K flags.
BatchLoss BatchSampleLoss(const Tensor& pred, const Tensor& target,
                          const std::vector<std::vector<int>>& visibility);

struct DecodedKeypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

// Argmax per channel, shifted a quarter cell toward the larger of the two
// neighbors on each axis (no shift on ties), then mapped to input pixels. At
// the border the missing neighbor is extrapolated from the target Gaussian.
std::vector<DecodedKeypoint> DecodeKeypoints(const Tensor& heatmaps, int64_t image_h,
                                             int64_t image_w);
std::vector<DecodedKeypoint> DecodeKeypoints(const Tensor& heatmaps, int output_stride);

// Fraction of visible keypoints whose prediction lies within
// threshold_fraction * image diagonal of the ground truth.
double Pck(const std::vector<Keypoint>& pred, const std::vector<Keypoint>& gt,
           const std::vector<int>& visibility, int64_t image_h, int64_t image_w,
           double threshold_fraction = 0.1);

}  // namespace evopose

#endif  // EVOPOSE_HEATMAP_H_
