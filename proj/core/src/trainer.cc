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

#include "evopose/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "evopose/error.h"
#include "evopose/graph.h"
#include "evopose/heatmap.h"

namespace evopose {
namespace {

double Unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void Shuffle(std::vector<int64_t>& v, std::mt19937_64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(Unit(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

Tensor Targets(const Batch& b, const ArchSpec& spec, int64_t image_h, int64_t image_w) {
  Tensor t({b.images.dim(0), spec.heatmap_h(), spec.heatmap_w(),
            static_cast<int64_t>(spec.keypoints)});
  for (int64_t n = 0; n < b.images.dim(0); ++n) {
    RenderTargetsInto(b.keypoints[n], b.visibility[n], image_h, image_w, t, n);
  }
  return t;
}

void CheckCompatible(const Network& net, const std::vector<PoseSample>& samples) {
  if (samples.empty()) throw InvalidArgument("empty split");
  const auto& s = net.spec();
  const auto& x = samples.front();
  if (x.height != s.input_h || x.width != s.input_w) {
    throw ShapeError("network input is " + std::to_string(s.input_h) + "x" +
                     std::to_string(s.input_w) + " but samples are " +
                     std::to_string(x.height) + "x" + std::to_string(x.width));
  }
  if (static_cast<int>(x.keypoints.size()) != s.keypoints) {
    throw ShapeError("network predicts " + std::to_string(s.keypoints) +
                     " keypoints but samples carry " + std::to_string(x.keypoints.size()));
  }
}

}  // namespace

int64_t StepsPerEpoch(int64_t samples, int64_t batch_size) {
  if (batch_size < 1) throw InvalidArgument("batch_size must be positive");
  return (samples + batch_size - 1) / batch_size;
}

LrSchedule MakeSchedule(const TrainOptions& o, int64_t train_samples) {
  LrSchedule s;
  s.base_lr = o.base_lr;
  s.batch_size = o.batch_size;
  s.reference_batch = o.reference_batch;
  s.warmup_epochs = o.warmup_epochs;
  s.total_epochs = o.epochs;
  s.steps_per_epoch = StepsPerEpoch(train_samples, o.batch_size);
  return s;
}

TrainResult Train(Network& net, const Dataset& data, const TrainOptions& o) {
  CheckCompatible(net, data.train);
  if (o.epochs < 0) throw InvalidArgument("epochs must be non-negative");
  TrainResult result;
  result.schedule = MakeSchedule(o, static_cast<int64_t>(data.train.size()));
  net.optimizer().config = o.adam;
  std::mt19937_64 rng(o.seed);
  const int64_t n = static_cast<int64_t>(data.train.size());
  std::vector<int64_t> order(n);
  std::vector<PoseSample> flipped(n);
  std::vector<char> has_flipped(n, 0);
  int64_t step = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int64_t epoch = 0; epoch < o.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Shuffle(order, rng);
    for (int64_t begin = 0; begin < n; begin += o.batch_size) {
      if (o.cancel != nullptr && o.cancel->load()) throw Interrupted();
      std::vector<const PoseSample*> batch;
      for (int64_t i = begin; i < std::min(n, begin + o.batch_size); ++i) {
        const int64_t idx = order[i];
        const bool flip = o.flip && (rng() >> 63) != 0;
        if (flip && !has_flipped[idx]) {
          flipped[idx] = FlipSample(data.train[idx]);
          has_flipped[idx] = 1;
        }
        batch.push_back(flip ? &flipped[idx] : &data.train[idx]);
      }
      const Batch b = MakeBatch(batch, data.norm);
      const Tensor targets = Targets(b, net.spec(), data.train[0].height, data.train[0].width);
      net.ZeroGrads();
      Graph g;
      const Graph::Id out = net.Forward(g, g.Constant(b.images), true);
      const BatchLoss loss = BatchSampleLoss(g.value(out), targets, b.visibility);
      if (!std::isfinite(loss.loss)) {
        throw DivergenceError("non-finite training loss at step " + std::to_string(step));
      }
      g.Backward(out, loss.grad);
      const double lr = LearningRateAt(result.schedule, step);
      auto params = net.TrainableTensors();
      AdamStep(params, net.optimizer(), lr);
      result.steps.push_back({step, epoch, lr, loss.loss});
      ++step;
    }
    if (o.min_over_epochs) {
      const double v = DatasetLoss(net, data.val, data.norm, o.eval_batch_size);
      result.epoch_val_loss.push_back(v);
      best_val = std::min(best_val, v);
    }
  }
  net.ZeroGrads();
  if (o.min_over_epochs && o.epochs > 0) {
    result.val_loss = best_val;
  } else {
    result.val_loss = DatasetLoss(net, data.val, data.norm, o.eval_batch_size);
  }
  if (!std::isfinite(result.val_loss)) throw DivergenceError("non-finite validation loss");
  return result;
}

double DatasetLoss(Network& net, const std::vector<PoseSample>& samples,
                   const Normalization& norm, int64_t batch_size) {
  return Evaluate(net, samples, norm, batch_size).loss;
}

EvalResult Evaluate(Network& net, const std::vector<PoseSample>& samples,
                    const Normalization& norm, int64_t batch_size, double pck_threshold) {
  CheckCompatible(net, samples);
  if (batch_size < 1) throw InvalidArgument("batch_size must be positive");
  const int64_t n = static_cast<int64_t>(samples.size());
  const int64_t h = samples[0].height, w = samples[0].width;
  double loss_sum = 0.0, pck_sum = 0.0;
  int64_t pck_count = 0;
  for (int64_t begin = 0; begin < n; begin += batch_size) {
    std::vector<const PoseSample*> batch;
    for (int64_t i = begin; i < std::min(n, begin + batch_size); ++i) batch.push_back(&samples[i]);
    const Batch b = MakeBatch(batch, norm);
    const Tensor pred = net.Predict(b.images);
    const Tensor targets = Targets(b, net.spec(), h, w);
    const BatchLoss loss = BatchSampleLoss(pred, targets, b.visibility);
    for (double v : loss.per_sample) loss_sum += v;
    const int64_t hh = pred.dim(1), hw = pred.dim(2), k = pred.dim(3);
    for (int64_t s = 0; s < pred.dim(0); ++s) {
      const auto& vis = b.visibility[s];
      if (std::none_of(vis.begin(), vis.end(), [](int v) { return v > 0; })) continue;
      Tensor maps({hh, hw, k});
      std::copy(pred.raw() + s * hh * hw * k, pred.raw() + (s + 1) * hh * hw * k, maps.raw());
      std::vector<Keypoint> decoded;
      for (const auto& d : DecodeKeypoints(maps, h, w)) decoded.push_back({d.x, d.y});
      pck_sum += Pck(decoded, b.keypoints[s], vis, h, w, pck_threshold);
      ++pck_count;
    }
  }
  EvalResult r;
  r.loss = loss_sum / static_cast<double>(n);
  r.pck = pck_count > 0 ? pck_sum / static_cast<double>(pck_count) : 0.0;
  return r;
}

}  // namespace evopose
