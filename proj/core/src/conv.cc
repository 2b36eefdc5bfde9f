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

#include "evopose/conv.h"

#include <algorithm>
#include <string>

#include "evopose/error.h"

namespace evopose {
namespace {

int64_t PadBefore(int64_t in, int64_t out, int k, int stride, int dilation) {
  const int64_t effective = static_cast<int64_t>(k - 1) * dilation + 1;
  const int64_t total = std::max<int64_t>((out - 1) * stride + effective - in, 0);
  return total / 2;
}

struct Dims {
  int64_t n, h, w, c;
  int k1, k2, ci, co;
};

Dims CheckDims(const Tensor& input, const ConvParams& p) {
  if (input.rank() != 4) {
    throw ShapeError("conv input must be NHWC rank 4, got " +
                     ShapeToString(input.shape()));
  }
  if (p.kernel.rank() != 4) {
    throw ShapeError("conv kernel must be rank 4 (k1, k2, in, out), got " +
                     ShapeToString(p.kernel.shape()));
  }
  if (p.stride < 1) throw InvalidArgument("conv stride must be >= 1");
  if (p.dilation < 1) throw InvalidArgument("conv dilation must be >= 1");
  if (p.kind == ConvKind::kTranspose && p.dilation != 1) {
    throw InvalidArgument("transpose conv supports dilation 1 only");
  }
  Dims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3),
         static_cast<int>(p.kernel.dim(0)), static_cast<int>(p.kernel.dim(1)),
         static_cast<int>(p.kernel.dim(2)), static_cast<int>(p.kernel.dim(3))};
  if (d.h < 1 || d.w < 1) {
    throw ShapeError("conv input spatial dims must be >= 1, got " +
                     ShapeToString(input.shape()));
  }
  if (d.k1 < 1 || d.k2 < 1) throw ShapeError("conv kernel spatial dims must be >= 1");
  if (d.c != d.ci) {
    throw ShapeError("conv input channel dim 3 is " + std::to_string(d.c) +
                     " but kernel dim 2 expects " + std::to_string(d.ci));
  }
  if (p.kind == ConvKind::kDepthwise && d.co != 1) {
    throw ShapeError("depthwise kernel dim 3 must be 1 (channel multiplier), got " +
                     std::to_string(d.co));
  }
  return d;
}

}  // namespace

const char* ConvKindName(ConvKind kind) {
  switch (kind) {
    case ConvKind::kStandard:
      return "conv";
    case ConvKind::kDepthwise:
      return "depthwise";
    case ConvKind::kTranspose:
      return "transpose";
  }
  return "?";
}

int64_t SameOutputSize(int64_t n, int stride, ConvKind kind) {
  if (kind == ConvKind::kTranspose) return n * stride;
  return (n + stride - 1) / stride;
}

ConvGeometry ComputeGeometry(int64_t in_h, int64_t in_w, int k1, int k2,
                             int stride, int dilation, ConvKind kind) {
  ConvGeometry g;
  g.in_h = in_h;
  g.in_w = in_w;
  g.out_h = SameOutputSize(in_h, stride, kind);
  g.out_w = SameOutputSize(in_w, stride, kind);
  if (kind == ConvKind::kTranspose) {
    // Padding of the forward conv that maps the large grid back to the input.
    g.pad_top = PadBefore(g.out_h, in_h, k1, stride, dilation);
    g.pad_left = PadBefore(g.out_w, in_w, k2, stride, dilation);
  } else {
    g.pad_top = PadBefore(in_h, g.out_h, k1, stride, dilation);
    g.pad_left = PadBefore(in_w, g.out_w, k2, stride, dilation);
  }
  return g;
}

Shape ConvOutputShape(const Shape& input, const ConvParams& params) {
  if (input.size() != 4) {
    throw ShapeError("conv input must be NHWC rank 4, got " + ShapeToString(input));
  }
  const auto& k = params.kernel.shape();
  if (k.size() != 4) throw ShapeError("conv kernel must be rank 4");
  if (input[3] != k[2]) {
    throw ShapeError("conv input channel dim 3 is " + std::to_string(input[3]) +
                     " but kernel dim 2 expects " + std::to_string(k[2]));
  }
  const int64_t oc = params.kind == ConvKind::kDepthwise ? k[2] : k[3];
  return {input[0], SameOutputSize(input[1], params.stride, params.kind),
          SameOutputSize(input[2], params.stride, params.kind), oc};
}

Tensor Convolve(const Tensor& input, const ConvParams& p) {
  const Dims d = CheckDims(input, p);
  const ConvGeometry g =
      ComputeGeometry(d.h, d.w, d.k1, d.k2, p.stride, p.dilation, p.kind);
  const double* x = input.raw();
  const double* wt = p.kernel.raw();

  if (p.kind == ConvKind::kTranspose) {
    Tensor out({d.n, g.out_h, g.out_w, d.co});
    double* y = out.raw();
    for (int64_t n = 0; n < d.n; ++n) {
      for (int64_t iy = 0; iy < d.h; ++iy) {
        for (int64_t ix = 0; ix < d.w; ++ix) {
          const double* xp = x + ((n * d.h + iy) * d.w + ix) * d.ci;
          for (int ky = 0; ky < d.k1; ++ky) {
            const int64_t oy = iy * p.stride + ky - g.pad_top;
            if (oy < 0 || oy >= g.out_h) continue;
            for (int kx = 0; kx < d.k2; ++kx) {
              const int64_t ox = ix * p.stride + kx - g.pad_left;
              if (ox < 0 || ox >= g.out_w) continue;
              double* yp = y + ((n * g.out_h + oy) * g.out_w + ox) * d.co;
              const double* wp = wt + (static_cast<int64_t>(ky) * d.k2 + kx) * d.ci * d.co;
              for (int ci = 0; ci < d.ci; ++ci) {
                const double xv = xp[ci];
                const double* wr = wp + static_cast<int64_t>(ci) * d.co;
                for (int co = 0; co < d.co; ++co) yp[co] += xv * wr[co];
              }
            }
          }
        }
      }
    }
    return out;
  }

  const int64_t oc = p.kind == ConvKind::kDepthwise ? d.ci : d.co;
  Tensor out({d.n, g.out_h, g.out_w, oc});
  double* y = out.raw();
  for (int64_t n = 0; n < d.n; ++n) {
    for (int64_t oy = 0; oy < g.out_h; ++oy) {
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        double* yp = y + ((n * g.out_h + oy) * g.out_w + ox) * oc;
        for (int ky = 0; ky < d.k1; ++ky) {
          const int64_t iy = oy * p.stride + static_cast<int64_t>(ky) * p.dilation - g.pad_top;
          if (iy < 0 || iy >= d.h) continue;
          for (int kx = 0; kx < d.k2; ++kx) {
            const int64_t ix = ox * p.stride + static_cast<int64_t>(kx) * p.dilation - g.pad_left;
            if (ix < 0 || ix >= d.w) continue;
            const double* xp = x + ((n * d.h + iy) * d.w + ix) * d.ci;
            if (p.kind == ConvKind::kDepthwise) {
              const double* wp = wt + (static_cast<int64_t>(ky) * d.k2 + kx) * d.ci;
              for (int c = 0; c < d.ci; ++c) yp[c] += xp[c] * wp[c];
            } else {
              const double* wp = wt + (static_cast<int64_t>(ky) * d.k2 + kx) * d.ci * d.co;
              for (int ci = 0; ci < d.ci; ++ci) {
                const double xv = xp[ci];
                const double* wr = wp + static_cast<int64_t>(ci) * d.co;
                for (int co = 0; co < d.co; ++co) yp[co] += xv * wr[co];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

ConvGrads ConvolveBackward(const Tensor& input, const ConvParams& p,
                           const Tensor& grad_out) {
  const Dims d = CheckDims(input, p);
  const ConvGeometry g =
      ComputeGeometry(d.h, d.w, d.k1, d.k2, p.stride, p.dilation, p.kind);
  const Shape expected = ConvOutputShape(input.shape(), p);
  if (grad_out.shape() != expected) {
    throw ShapeError("conv grad_out shape " + ShapeToString(grad_out.shape()) +
                     " does not match output shape " + ShapeToString(expected));
  }
  ConvGrads grads{Tensor(input.shape()), Tensor(p.kernel.shape())};
  const double* x = input.raw();
  const double* wt = p.kernel.raw();
  const double* gy = grad_out.raw();
  double* gx = grads.input.raw();
  double* gw = grads.kernel.raw();

  if (p.kind == ConvKind::kTranspose) {
    for (int64_t n = 0; n < d.n; ++n) {
      for (int64_t iy = 0; iy < d.h; ++iy) {
        for (int64_t ix = 0; ix < d.w; ++ix) {
          const int64_t in_off = ((n * d.h + iy) * d.w + ix) * d.ci;
          const double* xp = x + in_off;
          double* gxp = gx + in_off;
          for (int ky = 0; ky < d.k1; ++ky) {
            const int64_t oy = iy * p.stride + ky - g.pad_top;
            if (oy < 0 || oy >= g.out_h) continue;
            for (int kx = 0; kx < d.k2; ++kx) {
              const int64_t ox = ix * p.stride + kx - g.pad_left;
              if (ox < 0 || ox >= g.out_w) continue;
              const double* gyp = gy + ((n * g.out_h + oy) * g.out_w + ox) * d.co;
              const int64_t w_off = (static_cast<int64_t>(ky) * d.k2 + kx) * d.ci * d.co;
              for (int ci = 0; ci < d.ci; ++ci) {
                const double* wr = wt + w_off + static_cast<int64_t>(ci) * d.co;
                double* gwr = gw + w_off + static_cast<int64_t>(ci) * d.co;
                const double xv = xp[ci];
                double acc = 0.0;
                for (int co = 0; co < d.co; ++co) {
                  acc += gyp[co] * wr[co];
                  gwr[co] += xv * gyp[co];
                }
                gxp[ci] += acc;
              }
            }
          }
        }
      }
    }
    return grads;
  }

  const int64_t oc = p.kind == ConvKind::kDepthwise ? d.ci : d.co;
  for (int64_t n = 0; n < d.n; ++n) {
    for (int64_t oy = 0; oy < g.out_h; ++oy) {
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        const double* gyp = gy + ((n * g.out_h + oy) * g.out_w + ox) * oc;
        for (int ky = 0; ky < d.k1; ++ky) {
          const int64_t iy = oy * p.stride + static_cast<int64_t>(ky) * p.dilation - g.pad_top;
          if (iy < 0 || iy >= d.h) continue;
          for (int kx = 0; kx < d.k2; ++kx) {
            const int64_t ix = ox * p.stride + static_cast<int64_t>(kx) * p.dilation - g.pad_left;
            if (ix < 0 || ix >= d.w) continue;
            const int64_t in_off = ((n * d.h + iy) * d.w + ix) * d.ci;
            const double* xp = x + in_off;
            double* gxp = gx + in_off;
            if (p.kind == ConvKind::kDepthwise) {
              const int64_t w_off = (static_cast<int64_t>(ky) * d.k2 + kx) * d.ci;
              for (int c = 0; c < d.ci; ++c) {
                gxp[c] += gyp[c] * wt[w_off + c];
                gw[w_off + c] += xp[c] * gyp[c];
              }
            } else {
              const int64_t w_off = (static_cast<int64_t>(ky) * d.k2 + kx) * d.ci * d.co;
              for (int ci = 0; ci < d.ci; ++ci) {
                const double* wr = wt + w_off + static_cast<int64_t>(ci) * d.co;
                double* gwr = gw + w_off + static_cast<int64_t>(ci) * d.co;
                const double xv = xp[ci];
                double acc = 0.0;
                for (int co = 0; co < d.co; ++co) {
                  acc += gyp[co] * wr[co];
                  gwr[co] += xv * gyp[co];
                }
                gxp[ci] += acc;
              }
            }
          }
        }
      }
    }
  }
  return grads;
}

int64_t ConvMacs(const Shape& input_nhwc, const ConvParams& params) {
  const Shape out = ConvOutputShape(input_nhwc, params);
  const auto& k = params.kernel.shape();
  const int64_t taps = k[0] * k[1];
  switch (params.kind) {
    case ConvKind::kStandard:
      return out[1] * out[2] * taps * k[2] * k[3];
    case ConvKind::kDepthwise:
      return out[1] * out[2] * taps * k[2];
    case ConvKind::kTranspose:
      // Each input pixel scatters through the full kernel.
      return input_nhwc[1] * input_nhwc[2] * taps * k[2] * k[3];
  }
  return 0;
}

}  // namespace evopose
