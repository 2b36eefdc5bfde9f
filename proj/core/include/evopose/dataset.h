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

#ifndef EVOPOSE_DATASET_H_
#define EVOPOSE_DATASET_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evopose/heatmap.h"
#include "evopose/tensor.h"

namespace evopose {

// Joints of the synthetic stick figure. Left/right pairs are adjacent so the
// first K joints always form a flip-closed set for even K >= 2.
inline constexpr int kSkeletonSize = 14;
const std::array<std::string_view, kSkeletonSize>& JointNames();
// Mirror-image partner of joint j among the first `keypoints` joints.
int FlipPartner(int joint, int keypoints);

struct DatasetConfig {
  int64_t train_samples = 256;
  int64_t val_samples = 64;
  int64_t height = 64;
  int64_t width = 48;
  int keypoints = 8;
  uint64_t seed = 0;
  bool flip = true;  // horizontal flip augmentation during training
  double occlusion_prob = 0.08;

  bool operator==(const DatasetConfig&) const = default;
};

// Raw 8-bit RGB image plus annotations. Visibility: 0 for occluded or out of
// frame, 2 for visible (always inside the image).
struct PoseSample {
  int64_t id = 0;
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint8_t> pixels;  // (height, width, 3) row-major
  std::vector<Keypoint> keypoints;
  std::vector<int> visibility;

  bool operator==(const PoseSample&) const = default;
};

// Per-channel statistics of pixel/255 over a training split.
struct Normalization {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  std::array<double, 3> stddev{1.0, 1.0, 1.0};
  bool operator==(const Normalization&) const = default;
};

struct Dataset {
  DatasetConfig config;
  std::vector<PoseSample> train;
  std::vector<PoseSample> val;
  Normalization norm;
};

PoseSample GenerateSample(const DatasetConfig& config, int64_t id);
// Train ids are [0, train_samples), val ids follow. Bit-identical for equal configs.
Dataset GenerateDataset(const DatasetConfig& config);

Normalization ComputeNormalization(const std::vector<PoseSample>& samples);

// Mirrors the image, maps x to width - 1 - x and swaps left/right joints.
PoseSample FlipSample(const PoseSample& sample);

struct Batch {
  Tensor images;  // (N, H, W, 3), normalized
  std::vector<std::vector<Keypoint>> keypoints;
  std::vector<std::vector<int>> visibility;
};

Batch MakeBatch(const std::vector<const PoseSample*>& samples, const Normalization& norm);

// Sharded binary layout with an index.json; see docs/dataset_format.md.
void SaveDataset(const std::string& dir, const Dataset& dataset, int64_t shard_size = 256);
Dataset LoadDataset(const std::string& dir);
bool DatasetExists(const std::string& dir);

// <dir>/{train,val}/images/<id>.ppm (binary P6) with
// <dir>/{train,val}/annotations/<id>.txt holding one "x y v" line per keypoint.
Dataset ImportDirectory(const std::string& dir, int keypoints);

}  // namespace evopose

#endif  // EVOPOSE_DATASET_H_
