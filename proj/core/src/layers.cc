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

#include "evopose/layers.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "evopose/error.h"

namespace evopose {

BatchNormParams BatchNormParams::Identity(int64_t channels) {
  BatchNormParams p;
  p.gamma = Tensor({channels}, 1.0);
  p.beta = Tensor({channels}, 0.0);
  p.moving_mean = Tensor({channels}, 0.0);
  p.moving_var = Tensor({channels}, 1.0);
  return p;
}

void BatchNormParams::Validate() const {
  const int64_t c = gamma.size();
  if (gamma.rank() != 1 || beta.shape() != gamma.shape() ||
      moving_mean.shape() != gamma.shape() || moving_var.shape() != gamma.shape()) {
    throw ShapeError("batch norm vectors must all have shape (" + std::to_string(c) + ")");
  }
  for (double v : moving_var.data()) {
    if (v < 0.0) throw InvalidArgument("batch norm moving_var must be >= 0");
  }
  if (!(momentum > 0.0 && momentum < 1.0)) {
    throw InvalidArgument("batch norm momentum must lie in (0, 1)");
  }
}

BatchNormResult BatchNormForward(const Tensor& input, BatchNormParams& params,
                                 bool training) {
  params.Validate();
  const int64_t c = params.channels();
  if (input.rank() < 1 || input.dim(-1) != c) {
    throw ShapeError("batch norm input channel dim " +
                     std::to_string(input.rank() ? input.dim(-1) : 0) +
                     " does not match parameter length " + std::to_string(c));
  }
  const int64_t rows = static_cast<int64_t>(input.size()) / c;
  if (rows == 0) throw InvalidArgument("batch norm on an empty batch");

  BatchNormResult r{Tensor(input.shape()), Tensor(input.shape()),
                    std::vector<double>(c)};
  std::vector<double> mean(c, 0.0), var(c, 0.0);
  const double* x = input.raw();
  if (training) {
    for (int64_t i = 0; i < rows; ++i) {
      for (int64_t j = 0; j < c; ++j) mean[j] += x[i * c + j];
    }
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (int64_t i = 0; i < rows; ++i) {
      for (int64_t j = 0; j < c; ++j) {
        const double d = x[i * c + j] - mean[j];
        var[j] += d * d;
      }
    }
    for (auto& v : var) v /= static_cast<double>(rows);
    const double m = params.momentum;
    for (int64_t j = 0; j < c; ++j) {
      params.moving_mean[j] = m * params.moving_mean[j] + (1.0 - m) * mean[j];
      params.moving_var[j] = m * params.moving_var[j] + (1.0 - m) * var[j];
    }
  } else {
    for (int64_t j = 0; j < c; ++j) {
      mean[j] = params.moving_mean[j];
      var[j] = params.moving_var[j];
    }
  }
  for (int64_t j = 0; j < c; ++j) r.inv_std[j] = 1.0 / std::sqrt(var[j] + params.epsilon);
  double* y = r.output.raw();
  double* xh = r.normalized.raw();
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      const double n = (x[i * c + j] - mean[j]) * r.inv_std[j];
      xh[i * c + j] = n;
      y[i * c + j] = params.gamma[j] * n + params.beta[j];
    }
  }
  return r;
}

BatchNormGrads BatchNormBackward(const BatchNormResult& fwd,
                                 const BatchNormParams& params,
                                 const Tensor& grad_out, bool training) {
  CheckSameShape(fwd.output, grad_out, "batch norm grad_out");
  const int64_t c = params.channels();
  const int64_t rows = static_cast<int64_t>(grad_out.size()) / c;
  BatchNormGrads g{Tensor(grad_out.shape()), Tensor({c}), Tensor({c})};
  const double* gy = grad_out.raw();
  const double* xh = fwd.normalized.raw();
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      g.beta[j] += gy[i * c + j];
      g.gamma[j] += gy[i * c + j] * xh[i * c + j];
    }
  }
  double* gx = g.input.raw();
  if (!training) {
    for (int64_t i = 0; i < rows; ++i) {
      for (int64_t j = 0; j < c; ++j) {
        gx[i * c + j] = gy[i * c + j] * params.gamma[j] * fwd.inv_std[j];
      }
    }
    return g;
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      const double k = params.gamma[j] * fwd.inv_std[j];
      gx[i * c + j] =
          k * (gy[i * c + j] - inv_rows * g.beta[j] - xh[i * c + j] * inv_rows * g.gamma[j]);
    }
  }
  return g;
}

Tensor DenseForward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || bias.rank() != 1) {
    throw ShapeError("dense expects x (N, in), weight (in, out), bias (out)");
  }
  const int64_t n = x.dim(0), in = x.dim(1), out = weight.dim(1);
  if (weight.dim(0) != in) {
    throw ShapeError("dense input dim 1 is " + std::to_string(in) +
                     " but weight dim 0 expects " + std::to_string(weight.dim(0)));
  }
  if (bias.dim(0) != out) {
    throw ShapeError("dense bias dim 0 is " + std::to_string(bias.dim(0)) +
                     " but weight dim 1 is " + std::to_string(out));
  }
  Tensor y({n, out});
  for (int64_t r = 0; r < n; ++r) {
    double* yr = y.raw() + r * out;
    for (int64_t o = 0; o < out; ++o) yr[o] = bias[o];
    for (int64_t i = 0; i < in; ++i) {
      const double xv = x[r * in + i];
      const double* wr = weight.raw() + i * out;
      for (int64_t o = 0; o < out; ++o) yr[o] += xv * wr[o];
    }
  }
  return y;
}

DenseGrads DenseBackward(const Tensor& x, const Tensor& weight,
                         const Tensor& grad_out) {
  const int64_t n = x.dim(0), in = x.dim(1), out = weight.dim(1);
  if (grad_out.shape() != Shape{n, out}) {
    throw ShapeError("dense grad_out shape " + ShapeToString(grad_out.shape()));
  }
  DenseGrads g{Tensor(x.shape()), Tensor(weight.shape()), Tensor({out})};
  for (int64_t r = 0; r < n; ++r) {
    const double* gy = grad_out.raw() + r * out;
    for (int64_t o = 0; o < out; ++o) g.bias[o] += gy[o];
    for (int64_t i = 0; i < in; ++i) {
      const double* wr = weight.raw() + i * out;
      double* gwr = g.weight.raw() + i * out;
      const double xv = x[r * in + i];
      double acc = 0.0;
      for (int64_t o = 0; o < out; ++o) {
        acc += gy[o] * wr[o];
        gwr[o] += xv * gy[o];
      }
      g.input[r * in + i] = acc;
    }
  }
  return g;
}

Tensor GlobalAvgPool(const Tensor& x) {
  if (x.rank() != 4) throw ShapeError("global pool expects NHWC input");
  const int64_t n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  if (hw == 0) throw ShapeError("global pool over empty spatial dims");
  Tensor y({n, c});
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t p = 0; p < hw; ++p) {
      const double* xp = x.raw() + (b * hw + p) * c;
      for (int64_t j = 0; j < c; ++j) y[b * c + j] += xp[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(hw);
  for (auto& v : y.data()) v *= inv;
  return y;
}

Tensor GlobalAvgPoolBackward(const Shape& input_shape, const Tensor& grad_out) {
  const int64_t n = input_shape[0], hw = input_shape[1] * input_shape[2],
                c = input_shape[3];
  Tensor g(input_shape);
  const double inv = 1.0 / static_cast<double>(hw);
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t p = 0; p < hw; ++p) {
      double* gp = g.raw() + (b * hw + p) * c;
      for (int64_t j = 0; j < c; ++j) gp[j] = grad_out[b * c + j] * inv;
    }
  }
  return g;
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor SigmoidForward(const Tensor& x) {
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) y[i] = Sigmoid(x[i]);
  return y;
}

Tensor SigmoidBackward(const Tensor& y, const Tensor& grad_out) {
  Tensor g(y.shape());
  for (size_t i = 0; i < y.size(); ++i) g[i] = grad_out[i] * y[i] * (1.0 - y[i]);
  return g;
}

Tensor SwishForward(const Tensor& x) {
  Tensor y(x.shape());
  for (size_t i = 0; i < x.size(); ++i) y[i] = x[i] * Sigmoid(x[i]);
  return y;
}

Tensor SwishBackward(const Tensor& x, const Tensor& grad_out) {
  Tensor g(x.shape());
  for (size_t i = 0; i < x.size(); ++i) {
    const double s = Sigmoid(x[i]);
    g[i] = grad_out[i] * (s + x[i] * s * (1.0 - s));
  }
  return g;
}

Tensor AddForward(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "add");
  Tensor y(a.shape());
  for (size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
  return y;
}

Tensor BiasAddForward(const Tensor& x, const Tensor& bias) {
  const int64_t c = bias.size();
  if (x.rank() < 1 || x.dim(-1) != c) {
    throw ShapeError("bias length " + std::to_string(c) +
                     " does not match trailing dim of " + ShapeToString(x.shape()));
  }
  Tensor y = x;
  for (size_t i = 0; i < y.size(); ++i) y[i] += bias[i % c];
  return y;
}

Tensor BiasAddBackwardBias(const Tensor& grad_out, int64_t channels) {
  Tensor g({channels});
  for (size_t i = 0; i < grad_out.size(); ++i) g[i % channels] += grad_out[i];
  return g;
}

Tensor ChannelScaleForward(const Tensor& x, const Tensor& gate) {
  if (x.rank() != 4 || gate.rank() != 2 || gate.dim(0) != x.dim(0) ||
      gate.dim(1) != x.dim(3)) {
    throw ShapeError("channel scale: input " + ShapeToString(x.shape()) +
                     " vs gate " + ShapeToString(gate.shape()));
  }
  const int64_t n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  Tensor y(x.shape());
  for (int64_t b = 0; b < n; ++b) {
    const double* gp = gate.raw() + b * c;
    for (int64_t p = 0; p < hw; ++p) {
      const int64_t off = (b * hw + p) * c;
      for (int64_t j = 0; j < c; ++j) y[off + j] = x[off + j] * gp[j];
    }
  }
  return y;
}

ChannelScaleGrads ChannelScaleBackward(const Tensor& x, const Tensor& gate,
                                       const Tensor& grad_out) {
  const int64_t n = x.dim(0), hw = x.dim(1) * x.dim(2), c = x.dim(3);
  ChannelScaleGrads g{Tensor(x.shape()), Tensor(gate.shape())};
  for (int64_t b = 0; b < n; ++b) {
    const double* gp = gate.raw() + b * c;
    double* ggp = g.gate.raw() + b * c;
    for (int64_t p = 0; p < hw; ++p) {
      const int64_t off = (b * hw + p) * c;
      for (int64_t j = 0; j < c; ++j) {
        g.input[off + j] = grad_out[off + j] * gp[j];
        ggp[j] += grad_out[off + j] * x[off + j];
      }
    }
  }
  return g;
}

int64_t SqueezeExciteChannels(int64_t block_input_channels, double se_ratio) {
  if (se_ratio <= 0.0) throw InvalidArgument("se_ratio must be positive");
  const auto r = std::lround(static_cast<double>(block_input_channels) * se_ratio);
  return std::max<int64_t>(1, r);
}

Tensor SqueezeExcite(const Tensor& input, const SqueezeExciteWeights& w) {
  const Tensor pooled = GlobalAvgPool(input);
  const Tensor reduced = SwishForward(DenseForward(pooled, w.reduce_kernel, w.reduce_bias));
  const Tensor gate = SigmoidForward(DenseForward(reduced, w.expand_kernel, w.expand_bias));
  return ChannelScaleForward(input, gate);
}

}  // namespace evopose
