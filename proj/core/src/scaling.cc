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

#include "evopose/scaling.h"

#include <algorithm>
#include <cmath>

#include "evopose/error.h"

namespace evopose {

ScalingCoefficients ComputeScaling(int64_t resolution, int64_t search_resolution) {
  if (search_resolution <= 0) throw InvalidArgument("search resolution must be positive");
  if (resolution < search_resolution) {
    throw InvalidArgument("cannot scale down: resolution " + std::to_string(resolution) +
                          " is below the search resolution " +
                          std::to_string(search_resolution));
  }
  ScalingCoefficients s;
  s.search_resolution = search_resolution;
  s.phi = (std::log(static_cast<double>(resolution)) -
           std::log(static_cast<double>(search_resolution))) /
          std::log(s.gamma);
  s.c_d = std::pow(s.alpha, s.phi);
  s.c_w = std::pow(s.beta, s.phi);
  return s;
}

int RoundBlocks(double c_d, int blocks) {
  return std::max(1, static_cast<int>(std::lround(c_d * blocks)));
}

int RoundChannels(double c_w, int channels, int unit) {
  const long r = std::lround(c_w * channels / unit) * unit;
  return static_cast<int>(std::max<long>(unit, r));
}

ArchSpec CompoundScale(const Genotype& g, int64_t resolution, int keypoints,
                       const BuildOptions& options, int64_t search_resolution) {
  const auto violations = Validate(g);
  if (!violations.empty()) {
    BuildArchSpec(g, search_resolution, search_resolution * 3 / 4, keypoints, options);
  }
  const ScalingCoefficients s = ComputeScaling(resolution, search_resolution);
  std::vector<ModuleConfig> modules;
  for (int i = 0; i < kNumModules; ++i) {
    modules.push_back({RoundBlocks(s.c_d, g.blocks(i)), g.kernel(i),
                       RoundChannels(s.c_w, g.channels8(i) * options.channel_unit,
                                     options.channel_unit),
                       g.stride(i)});
  }
  BuildOptions scaled = options;
  scaled.head_channels = RoundChannels(s.c_w, options.head_channels, options.channel_unit);
  return DecodeModules(modules, resolution, resolution * 3 / 4, keypoints, scaled);
}

}  // namespace evopose
