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

#ifndef EVOPOSE_LAYERS_H_
#define EVOPOSE_LAYERS_H_

#include <vector>

#include "evopose/tensor.h"

namespace evopose {

// Per-channel batch normalization state. All four tensors have shape (C).
struct BatchNormParams {
  Tensor gamma;
  Tensor beta;
  Tensor moving_mean;
  Tensor moving_var;
  double momentum = 0.99;
  double epsilon = 1e-3;

  static BatchNormParams Identity(int64_t channels);
  int64_t channels() const { return gamma.size(); }
  void Validate() const;
};

struct BatchNormResult {
  Tensor output;
  Tensor normalized;            // x-hat, kept for the backward pass
  std::vector<double> inv_std;  // 1 / sqrt(var + eps) per channel
};

// Normalizes over every axis but the last. In training mode batch statistics
// are used and the moving statistics are updated in place.
BatchNormResult BatchNormForward(const Tensor& input, BatchNormParams& params,
                                 bool training);

struct BatchNormGrads {
  Tensor input;
  Tensor gamma;
  Tensor beta;
};

BatchNormGrads BatchNormBackward(const BatchNormResult& forward,
                                 const BatchNormParams& params,
                                 const Tensor& grad_out, bool training);

// x: (N, in), weight: (in, out), bias: (out) -> (N, out).
Tensor DenseForward(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct DenseGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};

DenseGrads DenseBackward(const Tensor& x, const Tensor& weight,
                         const Tensor& grad_out);

// (N, H, W, C) -> (N, C).
Tensor GlobalAvgPool(const Tensor& x);
Tensor GlobalAvgPoolBackward(const Shape& input_shape, const Tensor& grad_out);

double Sigmoid(double x);
Tensor SigmoidForward(const Tensor& x);
Tensor SigmoidBackward(const Tensor& y, const Tensor& grad_out);
Tensor SwishForward(const Tensor& x);
Tensor SwishBackward(const Tensor& x, const Tensor& grad_out);

Tensor AddForward(const Tensor& a, const Tensor& b);

// Adds a per-channel bias over the trailing axis.
Tensor BiasAddForward(const Tensor& x, const Tensor& bias);
Tensor BiasAddBackwardBias(const Tensor& grad_out, int64_t channels);

// x: (N, H, W, C) scaled by gate: (N, C).
Tensor ChannelScaleForward(const Tensor& x, const Tensor& gate);
struct ChannelScaleGrads {
  Tensor input;
  Tensor gate;
};
ChannelScaleGrads ChannelScaleBackward(const Tensor& x, const Tensor& gate,
                                       const Tensor& grad_out);

// Squeeze-excitation weights: reduce dense (C -> R) then expand dense (R -> C).
struct SqueezeExciteWeights {
  Tensor reduce_kernel;  // (C, R)
  Tensor reduce_bias;    // (R)
  Tensor expand_kernel;  // (R, C)
  Tensor expand_bias;    // (C)
};

// R = max(1, round(block_input_channels * se_ratio)).
int64_t SqueezeExciteChannels(int64_t block_input_channels, double se_ratio);

// input * sigmoid(expand(swish(reduce(avgpool(input))))).
Tensor SqueezeExcite(const Tensor& input, const SqueezeExciteWeights& weights);

}  // namespace evopose

#endif  // EVOPOSE_LAYERS_H_
