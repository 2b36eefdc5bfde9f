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

#ifndef EVOPOSE_SCALING_H_
#define EVOPOSE_SCALING_H_

#include <cstdint>
#include <vector>

#include "evopose/arch_spec.h"
#include "evopose/genotype.h"

namespace evopose {

struct ScalingCoefficients {
  double alpha = 1.2;
  double beta = 1.1;
  double gamma = 1.15;
  int64_t search_resolution = 256;
  double phi = 0.0;
  double c_d = 1.0;
  double c_w = 1.0;
};

// Coefficients for input height `resolution`. Throws for resolutions below
// the search resolution.
ScalingCoefficients ComputeScaling(int64_t resolution, int64_t search_resolution = 256);

int RoundBlocks(double c_d, int blocks);
// Nearest multiple of `unit`, at least `unit`.
int RoundChannels(double c_w, int channels, int unit = 8);

// Scales depth and width of every module (and the head width) of `g` and
// decodes it at resolution x resolution*3/4.
ArchSpec CompoundScale(const Genotype& g, int64_t resolution, int keypoints = 17,
                       const BuildOptions& options = {},
                       int64_t search_resolution = 256);

}  // namespace evopose

#endif  // EVOPOSE_SCALING_H_
