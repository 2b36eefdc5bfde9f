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

#ifndef EVOPOSE_CONV_H_
#define EVOPOSE_CONV_H_

#include <cstdint>

#include "evopose/tensor.h"

namespace evopose {

enum class ConvKind { kStandard, kDepthwise, kTranspose };

const char* ConvKindName(ConvKind kind);

// Kernel layout is (k1, k2, in, out). Depthwise kernels use out == 1 with a
// channel multiplier of one. Transpose kernels map `in` input channels to
// `out` output channels. Padding is always SAME.
struct ConvParams {
  Tensor kernel;
  int stride = 1;
  int dilation = 1;
  ConvKind kind = ConvKind::kStandard;
};

// Spatial layout of one SAME-padded convolution along both axes. For the
// transpose kind the geometry describes the adjoint forward conv, i.e. the
// `out_*` fields are the (larger) transpose outputs.
struct ConvGeometry {
  int64_t in_h = 0, in_w = 0;
  int64_t out_h = 0, out_w = 0;
  int64_t pad_top = 0, pad_left = 0;
};

// Output spatial extent of a SAME conv: ceil(n / stride), or n * stride for
// the transpose kind.
int64_t SameOutputSize(int64_t n, int stride, ConvKind kind);

ConvGeometry ComputeGeometry(int64_t in_h, int64_t in_w, int k1, int k2,
                             int stride, int dilation, ConvKind kind);

// Validates `params` against an NHWC `input` and returns the output shape.
Shape ConvOutputShape(const Shape& input, const ConvParams& params);

Tensor Convolve(const Tensor& input, const ConvParams& params);

struct ConvGrads {
  Tensor input;
  Tensor kernel;
};

// Gradients of sum(grad_out * Convolve(input, params)) with respect to the
// input and the kernel.
ConvGrads ConvolveBackward(const Tensor& input, const ConvParams& params,
                           const Tensor& grad_out);

// Multiply-accumulate count of one forward pass for a single image.
int64_t ConvMacs(const Shape& input_nhwc, const ConvParams& params);

}  // namespace evopose

#endif  // EVOPOSE_CONV_H_
