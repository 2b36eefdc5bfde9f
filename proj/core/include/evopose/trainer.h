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

#ifndef EVOPOSE_TRAINER_H_
#define EVOPOSE_TRAINER_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <vector>

#include "evopose/dataset.h"
#include "evopose/error.h"
#include "evopose/network.h"
#include "evopose/optimizer.h"
#include "evopose/schedule.h"

namespace evopose {

struct TrainOptions {
  int64_t epochs = 1;
  int64_t batch_size = 16;
  double base_lr = 2.5e-4;
  int64_t reference_batch = 32;
  int64_t warmup_epochs = 5;
  AdamConfig adam;
  bool flip = true;
  uint64_t seed = 0;  // shuffling and flip draws
  int64_t eval_batch_size = 32;
  // Report the lowest end-of-epoch validation loss instead of the last one.
  bool min_over_epochs = false;
  // Polled once per step; training stops with Interrupted when set.
  const std::atomic<bool>* cancel = nullptr;
};

struct StepRecord {
  int64_t step = 0;
  int64_t epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  LrSchedule schedule;
  std::vector<StepRecord> steps;
  std::vector<double> epoch_val_loss;  // filled only with min_over_epochs
  double val_loss = 0.0;
};

class Interrupted : public Error {
 public:
  Interrupted() : Error("interrupted") {}
};

// ceil(samples / batch_size).
int64_t StepsPerEpoch(int64_t samples, int64_t batch_size);

LrSchedule MakeSchedule(const TrainOptions& options, int64_t train_samples);

// Mini-batch Adam with the warmup + cosine schedule; returns the validation
// loss after the last epoch. Throws DivergenceError on a non-finite loss.
TrainResult Train(Network& net, const Dataset& data, const TrainOptions& options);

// Mean per-sample loss in inference mode.
double DatasetLoss(Network& net, const std::vector<PoseSample>& samples,
                   const Normalization& norm, int64_t batch_size = 32);

struct EvalResult {
  double loss = 0.0;
  double pck = 0.0;  // over samples with at least one visible keypoint
};

EvalResult Evaluate(Network& net, const std::vector<PoseSample>& samples,
                    const Normalization& norm, int64_t batch_size = 32,
                    double pck_threshold = 0.1);

}  // namespace evopose

#endif  // EVOPOSE_TRAINER_H_
