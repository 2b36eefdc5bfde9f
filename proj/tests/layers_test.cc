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

#include <cmath>

#include <gtest/gtest.h>

#include "evopose/error.h"
#include "evopose/graph.h"
#include "evopose/layers.h"
#include "test_util.h"

namespace evopose {
namespace {

using testing::GradCheck;
using testing::RandomTensor;

constexpr double kGradTol = 1e-4;

void ExpectGrad(std::vector<Tensor*> params, const testing::GraphFn& fn) {
  const auto r = GradCheck(std::move(params), fn);
  EXPECT_LT(r.max_rel_error, kGradTol) << r.worst;
}

TEST(GradientTest, StandardConv) {
  for (int stride : {1, 2}) {
    Tensor x = RandomTensor({2, 5, 4, 3}, 1), k = RandomTensor({3, 3, 3, 2}, 2);
    ExpectGrad({&x, &k}, [&](Graph& g, const std::vector<Graph::Id>& p) {
      return g.Conv(p[0], p[1], stride, ConvKind::kStandard);
    });
  }
}

TEST(GradientTest, DepthwiseConv) {
  for (int stride : {1, 2}) {
    Tensor x = RandomTensor({2, 5, 5, 3}, 3), k = RandomTensor({5, 5, 3, 1}, 4);
    ExpectGrad({&x, &k}, [&](Graph& g, const std::vector<Graph::Id>& p) {
      return g.Conv(p[0], p[1], stride, ConvKind::kDepthwise);
    });
  }
}

TEST(GradientTest, TransposeConv) {
  Tensor x = RandomTensor({1, 3, 2, 4}, 5), k = RandomTensor({3, 3, 4, 2}, 6);
  ExpectGrad({&x, &k}, [&](Graph& g, const std::vector<Graph::Id>& p) {
    return g.Conv(p[0], p[1], 2, ConvKind::kTranspose);
  });
}

TEST(GradientTest, BatchNormTraining) {
  Tensor x = RandomTensor({3, 2, 2, 3}, 7);
  BatchNormParams stats = BatchNormParams::Identity(3);
  stats.gamma = RandomTensor({3}, 8, 0.5, 1.5);
  stats.beta = RandomTensor({3}, 9);
  ExpectGrad({&x, &stats.gamma, &stats.beta}, [&](Graph& g, const std::vector<Graph::Id>& p) {
    return g.BatchNorm(p[0], p[1], p[2], &stats, true);
  });
}

TEST(GradientTest, BatchNormInference) {
  Tensor x = RandomTensor({2, 2, 2, 3}, 10);
  BatchNormParams stats = BatchNormParams::Identity(3);
  stats.gamma = RandomTensor({3}, 11);
  stats.beta = RandomTensor({3}, 12);
  stats.moving_mean = RandomTensor({3}, 13);
  stats.moving_var = RandomTensor({3}, 14, 0.5, 2.0);
  ExpectGrad({&x, &stats.gamma, &stats.beta}, [&](Graph& g, const std::vector<Graph::Id>& p) {
    return g.BatchNorm(p[0], p[1], p[2], &stats, false);
  });
}

TEST(GradientTest, Dense) {
  Tensor x = RandomTensor({3, 4}, 15), w = RandomTensor({4, 2}, 16), b = RandomTensor({2}, 17);
  ExpectGrad({&x, &w, &b}, [](Graph& g, const std::vector<Graph::Id>& p) {
    return g.Dense(p[0], p[1], p[2]);
  });
}

TEST(GradientTest, GlobalAvgPool) {
  Tensor x = RandomTensor({2, 3, 2, 4}, 18);
  ExpectGrad({&x}, [](Graph& g, const std::vector<Graph::Id>& p) {
    return g.GlobalAvgPool(p[0]);
  });
}

TEST(GradientTest, Swish) {
  Tensor x = RandomTensor({2, 7}, 19, -4.0, 4.0);
  ExpectGrad({&x}, [](Graph& g, const std::vector<Graph::Id>& p) { return g.Swish(p[0]); });
}

TEST(GradientTest, Sigmoid) {
  Tensor x = RandomTensor({2, 7}, 20, -4.0, 4.0);
  ExpectGrad({&x}, [](Graph& g, const std::vector<Graph::Id>& p) { return g.Sigmoid(p[0]); });
}

TEST(GradientTest, Add) {
  Tensor a = RandomTensor({2, 2, 2, 3}, 21), b = RandomTensor({2, 2, 2, 3}, 22);
  ExpectGrad({&a, &b}, [](Graph& g, const std::vector<Graph::Id>& p) {
    return g.Add(p[0], g.Add(p[0], p[1]));
  });
}

TEST(GradientTest, ChannelScale) {
  Tensor x = RandomTensor({2, 3, 2, 4}, 23), gate = RandomTensor({2, 4}, 24);
  ExpectGrad({&x, &gate}, [](Graph& g, const std::vector<Graph::Id>& p) {
    return g.ChannelScale(p[0], p[1]);
  });
}

TEST(GradientTest, BiasAdd) {
  Tensor x = RandomTensor({2, 2, 3, 4}, 25), b = RandomTensor({4}, 26);
  ExpectGrad({&x, &b}, [](Graph& g, const std::vector<Graph::Id>& p) {
    return g.BiasAdd(p[0], p[1]);
  });
}

TEST(GradientTest, SqueezeExciteChain) {
  Tensor x = RandomTensor({2, 3, 3, 4}, 27), w1 = RandomTensor({4, 2}, 28),
         b1 = RandomTensor({2}, 29), w2 = RandomTensor({2, 4}, 30), b2 = RandomTensor({4}, 31);
  ExpectGrad({&x, &w1, &b1, &w2, &b2}, [](Graph& g, const std::vector<Graph::Id>& p) {
    const auto pooled = g.GlobalAvgPool(p[0]);
    const auto gate = g.Sigmoid(g.Dense(g.Swish(g.Dense(pooled, p[1], p[2])), p[3], p[4]));
    return g.ChannelScale(p[0], gate);
  });
}

TEST(BatchNormTest, IdentityInference) {
  BatchNormParams bn = BatchNormParams::Identity(3);
  const Tensor x = RandomTensor({2, 2, 2, 3}, 40);
  const auto r = BatchNormForward(x, bn, false);
  EXPECT_LT(MaxAbsDiff(r.output, x), 1e-3);
}

TEST(BatchNormTest, ConstantInputGivesBeta) {
  BatchNormParams bn = BatchNormParams::Identity(2);
  bn.beta = Tensor({2}, std::vector<double>{0.5, -1.5});
  const auto r = BatchNormForward(Tensor({4, 2, 2, 2}, 3.0), bn, true);
  for (size_t i = 0; i < r.output.size(); ++i) EXPECT_DOUBLE_EQ(r.output[i], bn.beta[i % 2]);
}

TEST(BatchNormTest, TrainingOutputStatistics) {
  BatchNormParams bn = BatchNormParams::Identity(3);
  bn.epsilon = 0.0;
  bn.gamma = Tensor({3}, std::vector<double>{2.0, -0.5, 1.0});
  bn.beta = Tensor({3}, std::vector<double>{1.0, 0.0, -3.0});
  const Tensor x = RandomTensor({4, 3, 3, 3}, 41, -5.0, 7.0);
  const auto r = BatchNormForward(x, bn, true);
  const size_t rows = x.size() / 3;
  for (int c = 0; c < 3; ++c) {
    double mean = 0, var = 0;
    for (size_t i = 0; i < rows; ++i) mean += r.output[i * 3 + c];
    mean /= rows;
    for (size_t i = 0; i < rows; ++i) var += std::pow(r.output[i * 3 + c] - mean, 2);
    var /= rows;
    EXPECT_NEAR(mean, bn.beta[c], 1e-6);
    EXPECT_NEAR(std::sqrt(var), std::abs(bn.gamma[c]), 1e-6);
  }
}

TEST(BatchNormTest, TrainingUpdatesMovingStats) {
  BatchNormParams bn = BatchNormParams::Identity(1);
  bn.momentum = 0.9;
  const Tensor x({2, 1, 1, 1}, std::vector<double>{1.0, 3.0});
  BatchNormForward(x, bn, true);
  EXPECT_NEAR(bn.moving_mean[0], 0.1 * 2.0, 1e-12);
  EXPECT_GT(bn.moving_var[0], 0.9);
  const Tensor before = bn.moving_mean;
  BatchNormForward(x, bn, false);
  EXPECT_TRUE(bn.moving_mean == before);
}

TEST(BatchNormTest, EmptyBatchIsAnError) {
  BatchNormParams bn = BatchNormParams::Identity(2);
  EXPECT_THROW(BatchNormForward(Tensor({0, 2, 2, 2}), bn, true), InvalidArgument);
}

TEST(BatchNormTest, ChannelMismatchIsAnError) {
  BatchNormParams bn = BatchNormParams::Identity(2);
  EXPECT_THROW(BatchNormForward(Tensor({1, 2, 2, 3}), bn, true), ShapeError);
}

SqueezeExciteWeights GateWeights(int64_t c, int64_t r, double expand_bias) {
  return {RandomTensor({c, r}, 50), RandomTensor({r}, 51), Tensor({r, c}),
          Tensor({c}, expand_bias)};
}

TEST(SqueezeExciteTest, ReducedChannels) {
  EXPECT_EQ(SqueezeExciteChannels(16, 0.25), 4);
  EXPECT_EQ(SqueezeExciteChannels(2, 0.25), 1);
  EXPECT_EQ(SqueezeExciteChannels(80, 0.25), 20);
}

TEST(SqueezeExciteTest, OpenGatePassesInput) {
  const Tensor x = RandomTensor({2, 3, 3, 4}, 52);
  EXPECT_LT(MaxAbsDiff(SqueezeExcite(x, GateWeights(4, 1, 60.0)), x), 1e-12);
}

TEST(SqueezeExciteTest, ClosedGateZeroesOutput) {
  const Tensor x = RandomTensor({2, 3, 3, 4}, 53);
  EXPECT_LT(MaxAbsDiff(SqueezeExcite(x, GateWeights(4, 1, -60.0)), Tensor(x.shape())), 1e-12);
}

TEST(SqueezeExciteTest, MatchesHandRolledOracle) {
  const int64_t n = 2, h = 3, w = 2, c = 4, r = 2;
  const Tensor x = RandomTensor({n, h, w, c}, 54);
  const SqueezeExciteWeights sw{RandomTensor({c, r}, 55), RandomTensor({r}, 56),
                                RandomTensor({r, c}, 57), RandomTensor({c}, 58)};
  const Tensor y = SqueezeExcite(x, sw);
  for (int64_t b = 0; b < n; ++b) {
    std::vector<double> pooled(c, 0.0), hidden(r, 0.0), gate(c, 0.0);
    for (int64_t i = 0; i < h; ++i)
      for (int64_t j = 0; j < w; ++j)
        for (int64_t k = 0; k < c; ++k) pooled[k] += x.at({b, i, j, k}) / (h * w);
    for (int64_t q = 0; q < r; ++q) {
      double s = sw.reduce_bias[q];
      for (int64_t k = 0; k < c; ++k) s += pooled[k] * sw.reduce_kernel.at({k, q});
      hidden[q] = s / (1.0 + std::exp(-s));
    }
    for (int64_t k = 0; k < c; ++k) {
      double s = sw.expand_bias[k];
      for (int64_t q = 0; q < r; ++q) s += hidden[q] * sw.expand_kernel.at({q, k});
      gate[k] = 1.0 / (1.0 + std::exp(-s));
    }
    for (int64_t i = 0; i < h; ++i)
      for (int64_t j = 0; j < w; ++j)
        for (int64_t k = 0; k < c; ++k) {
          EXPECT_NEAR(y.at({b, i, j, k}), x.at({b, i, j, k}) * gate[k], 1e-8);
        }
  }
}

TEST(ActivationTest, SwishAndSigmoidValues) {
  EXPECT_DOUBLE_EQ(Sigmoid(0.0), 0.5);
  const Tensor s = SwishForward(Tensor({2}, std::vector<double>{0.0, 2.0}));
  EXPECT_EQ(s[0], 0.0);
  EXPECT_NEAR(s[1], 2.0 / (1.0 + std::exp(-2.0)), 1e-15);
  EXPECT_TRUE(std::isfinite(Sigmoid(-1000.0)));
}

}  // namespace
}  // namespace evopose
