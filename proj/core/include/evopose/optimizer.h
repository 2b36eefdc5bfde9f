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

#ifndef EVOPOSE_OPTIMIZER_H_
#define EVOPOSE_OPTIMIZER_H_

#include <cstdint>
#include <map>
#include <string>

#include "evopose/tensor.h"

namespace evopose {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled decay: p -= lr * weight_decay * p on every step.
  double weight_decay = 1e-5;
};

struct AdamSlot {
  Tensor m;
  Tensor v;
};

struct AdamState {
  AdamConfig config;
  int64_t step = 0;
  std::map<std::string, AdamSlot> slots;
};

// One bias-corrected Adam step on `param` using its gradient. `step` is the
// 1-based update index used for bias correction. Throws if the gradient is
// missing.
void AdamUpdate(Tensor& param, AdamSlot& slot, int64_t step, double lr,
                const AdamConfig& config);

// Applies one update to every named parameter and increments state.step by 1.
void AdamStep(std::map<std::string, Tensor*>& params, AdamState& state, double lr);

}  // namespace evopose

#endif  // EVOPOSE_OPTIMIZER_H_
