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

#include "evopose/schedule.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "evopose/error.h"

namespace evopose {

double LrSchedule::PeakLr() const {
  return base_lr * static_cast<double>(batch_size) / static_cast<double>(reference_batch);
}

int64_t LrSchedule::WarmupSteps() const {
  return std::min(warmup_epochs * steps_per_epoch, TotalSteps());
}

void LrSchedule::Validate() const {
  if (!(base_lr > 0.0)) throw InvalidArgument("base_lr must be positive");
  if (batch_size < 1 || reference_batch < 1) {
    throw InvalidArgument("batch sizes must be >= 1");
  }
  if (warmup_epochs < 0) throw InvalidArgument("warmup_epochs must be >= 0");
  if (total_epochs < 0 || steps_per_epoch < 1) {
    throw InvalidArgument("total_epochs must be >= 0 and steps_per_epoch >= 1");
  }
}

double LearningRateAt(const LrSchedule& s, int64_t global_step) {
  s.Validate();
  const int64_t total = s.TotalSteps();
  if (global_step < 0 || global_step >= total) {
    throw InvalidArgument("global step " + std::to_string(global_step) +
                          " outside [0, " + std::to_string(total) + ")");
  }
  const double peak = s.PeakLr();
  const int64_t warmup = s.WarmupSteps();
  if (global_step < warmup) {
    const double t = static_cast<double>(global_step) / static_cast<double>(warmup);
    return s.base_lr + (peak - s.base_lr) * t;
  }
  const int64_t span = total - 1 - warmup;
  if (span <= 0) return peak;
  const double t = static_cast<double>(global_step - warmup) / static_cast<double>(span);
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace evopose
