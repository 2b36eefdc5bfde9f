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

#ifndef EVOPOSE_SCHEDULE_H_
#define EVOPOSE_SCHEDULE_H_

#include <cstdint>

namespace evopose {

// Linear warmup from base_lr to the batch-scaled peak, then cosine decay to
// zero at the last step.
struct LrSchedule {
  double base_lr = 2.5e-4;
  int64_t batch_size = 32;
  int64_t reference_batch = 32;
  int64_t warmup_epochs = 5;
  int64_t total_epochs = 1;
  int64_t steps_per_epoch = 1;

  // base_lr * batch_size / reference_batch.
  double PeakLr() const;
  int64_t TotalSteps() const { return total_epochs * steps_per_epoch; }
  int64_t WarmupSteps() const;
  void Validate() const;
};

// Throws InvalidArgument when global_step is outside [0, TotalSteps()).
double LearningRateAt(const LrSchedule& schedule, int64_t global_step);

}  // namespace evopose

#endif  // EVOPOSE_SCHEDULE_H_
