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
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "evopose/arch_spec.h"
#include "evopose/conv.h"
#include "evopose/error.h"
#include "evopose/genotype.h"
#include "evopose/network.h"
#include "evopose/scaling.h"
#include "test_util.h"

namespace evopose {
namespace {

struct Row {
  const char* component;
  int blocks, kernel, stride;
  int64_t h, w, c;
};

// EvoPose2D-S at 256x192, K = 17.
const Row kSmallTable[] = {
    {"Stem Conv", 0, 3, 2, 128, 96, 32},    {"Module 1", 1, 3, 1, 128, 96, 16},
    {"Module 2", 3, 3, 2, 64, 48, 24},      {"Module 3", 2, 5, 2, 32, 24, 40},
    {"Module 4", 4, 3, 2, 16, 12, 80},      {"Module 5", 2, 5, 1, 16, 12, 112},
    {"Module 6", 4, 5, 1, 16, 12, 128},     {"Module 7", 2, 3, 1, 16, 12, 80},
    {"Head Conv 1", 0, 3, 2, 32, 24, 128},  {"Head Conv 2", 0, 3, 2, 64, 48, 128},
    {"Head Conv 3", 0, 3, 2, 128, 96, 128}, {"Final Conv", 0, 1, 1, 128, 96, 17},
};

BuildOptions ToyOptions() {
  BuildOptions o;
  o.channel_unit = 2;
  o.stem_channels = 16;
  o.head_channels = 32;
  return o;
}

TEST(ArchTest, EvoPose2DSDecodeTable) {
  const ArchSpec spec = BuildArchSpec(EvoPose2DSGenotype(), 256, 192, 17);
  const auto rows = spec.DecodeTable();
  ASSERT_EQ(rows.size(), std::size(kSmallTable));
  for (size_t i = 0; i < rows.size(); ++i) {
    const Row& want = kSmallTable[i];
    EXPECT_EQ(rows[i].component, want.component);
    EXPECT_EQ(rows[i].blocks, want.blocks) << want.component;
    EXPECT_EQ(rows[i].kernel, want.kernel) << want.component;
    EXPECT_EQ(rows[i].stride, want.stride) << want.component;
    EXPECT_EQ(rows[i].out_h, want.h) << want.component;
    EXPECT_EQ(rows[i].out_w, want.w) << want.component;
    EXPECT_EQ(rows[i].out_c, want.c) << want.component;
  }
}

TEST(ArchTest, EvoPose2DSCost) {
  const NetworkCost c = CountParamsFlops(BuildArchSpec(EvoPose2DSGenotype(), 256, 192, 17));
  EXPECT_NEAR(static_cast<double>(c.params), 2.53e6, 0.05 * 2.53e6);
  EXPECT_NEAR(static_cast<double>(c.macs), 1.07e9, 0.10 * 1.07e9);
  EXPECT_EQ(c.flops, 2 * c.macs);
  EXPECT_GT(c.params_with_bn_stats, c.params);
}

TEST(ArchTest, AncestorBackboneAndHead) {
  const ArchSpec spec = BuildArchSpec(AncestorGenotype(), 256, 192, 17);
  EXPECT_EQ(spec.backbone_h(), 8);
  EXPECT_EQ(spec.backbone_w(), 6);
  EXPECT_EQ(spec.backbone_channels(), 320);
  EXPECT_EQ(spec.head.back().out_h, 64);
  EXPECT_EQ(spec.head.back().out_w, 48);
  EXPECT_EQ(spec.head.back().out_channels, 128);
  EXPECT_EQ(spec.BackboneStride(), 32);
}

TEST(ArchTest, HeatmapIsHalfInputForStride16Backbone) {
  const ArchSpec spec = BuildArchSpec(EvoPose2DSGenotype(), 64, 48, 8);
  EXPECT_EQ(spec.heatmap_h(), 32);
  EXPECT_EQ(spec.heatmap_w(), 24);
}

TEST(ArchTest, InvalidGenotypeIsRejected) {
  Genotype g = AncestorGenotype();
  g.grid[0][kBlocks] = 9;
  EXPECT_THROW(BuildArchSpec(g, 256, 192, 17), InvalidArgument);
}

TEST(ArchTest, ZeroFinalConvGivesZeroHeatmaps) {
  Network net(BuildArchSpec(AncestorGenotype(), 64, 48, 8, ToyOptions()), 5);
  net.tensor("final/kernel").Fill(0.0);
  net.tensor("final/bias").Fill(0.0);
  const Tensor out = net.Predict(Tensor({1, 64, 48, 3}));
  EXPECT_EQ(out.shape(), (Shape{1, 16, 16, 8}));
  for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(ArchTest, SingleOneByOneConvHasOneParam) {
  EXPECT_EQ(NumElements(ConvParams{Tensor({1, 1, 1, 1})}.kernel.shape()), 1);
}

TEST(ArchTest, ConvFlopsExample) {
  ConvParams p{Tensor({3, 3, 2, 4}), 1};
  EXPECT_EQ(2 * ConvMacs({1, 8, 8, 2}, p), 9216);
}

TEST(ArchTest, ParamsMonotoneInChannels) {
  const Genotype& a = AncestorGenotype();
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Genotype g = a;
    for (int r = 0; r < kNumModules; ++r) {
      g.grid[r][kChannels] = 1 + static_cast<int>(rng() % a.channels8(r));
    }
    const int64_t base = CountParamsFlops(BuildArchSpec(g, 256, 192, 17)).params;
    for (int r = 0; r < kNumModules; ++r) {
      if (g.channels8(r) == a.channels8(r)) continue;
      Genotype up = g;
      up.grid[r][kChannels] += 1;
      EXPECT_GE(CountParamsFlops(BuildArchSpec(up, 256, 192, 17)).params, base);
    }
  }
}

TEST(ArchTest, StrideDecreaseKeepsParamsRaisesFlops) {
  for (int row = kFirstStrideMutableRow; row < kNumModules; ++row) {
    if (AncestorGenotype().stride(row) != 2) continue;
    Genotype g = AncestorGenotype();
    g.grid[row][kStride] = 1;
    const NetworkCost before = CountParamsFlops(BuildArchSpec(AncestorGenotype(), 256, 192, 17));
    const NetworkCost after = CountParamsFlops(BuildArchSpec(g, 256, 192, 17));
    EXPECT_EQ(after.params, before.params);
    EXPECT_GT(after.flops, before.flops);
  }
}

TEST(ArchTest, RandomGenotypesForwardWithPredictedShape) {
  GenotypeCache cache;
  cache.Insert(AncestorGenotype());
  std::mt19937_64 rng(21);
  Genotype g = AncestorGenotype();
  const Tensor image({1, 64, 48, 3}, 0.5);
  for (int t = 0; t < 1000; ++t) {
    g = Mutate(g, AncestorGenotype(), cache, rng);
    const ArchSpec spec = BuildArchSpec(g, 64, 48, 8, ToyOptions());
    Network net(spec, static_cast<uint64_t>(t));
    const Tensor out = net.Predict(image);
    ASSERT_EQ(out.shape(), (Shape{1, spec.heatmap_h(), spec.heatmap_w(), 8}))
        << CanonicalEncode(g);
    const int64_t factor = spec.BackboneStride() / 8;
    ASSERT_EQ(spec.heatmap_h(), (64 + factor - 1) / factor) << CanonicalEncode(g);
  }
}

TEST(ArchTest, ArchTextListsEveryLayer) {
  const ArchSpec spec = BuildArchSpec(AncestorGenotype(), 256, 192, 17);
  const std::string text = spec.ToText();
  EXPECT_NE(text.find("m6/b3/dw depthwise k5"), std::string::npos) << text;
  EXPECT_NE(text.find("final conv k1 s1 128->17 out 64x48x17"), std::string::npos);
}

TEST(ScalingTest, CoefficientsAt384) {
  const auto s = ComputeScaling(384);
  EXPECT_NEAR(s.phi, 2.90, 0.01);
  EXPECT_NEAR(s.c_d, 1.70, 0.01);
  EXPECT_NEAR(s.c_w, 1.32, 0.01);
}

TEST(ScalingTest, CoefficientsAt512) {
  const auto s = ComputeScaling(512);
  EXPECT_NEAR(s.phi, 4.96, 0.01);
  EXPECT_NEAR(s.c_d, 2.47, 0.01);
  EXPECT_NEAR(s.c_w, 1.60, 0.01);
}

TEST(ScalingTest, SearchResolutionIsIdentity) {
  const auto s = ComputeScaling(256);
  EXPECT_EQ(s.phi, 0.0);
  EXPECT_EQ(s.c_d, 1.0);
  EXPECT_EQ(s.c_w, 1.0);
  const ArchSpec scaled = CompoundScale(EvoPose2DSGenotype(), 256);
  EXPECT_EQ(scaled.ToText(), BuildArchSpec(EvoPose2DSGenotype(), 256, 192, 17).ToText());
}

TEST(ScalingTest, DownScalingIsAnError) {
  EXPECT_THROW(ComputeScaling(200), InvalidArgument);
}

TEST(ScalingTest, Rounding) {
  EXPECT_EQ(RoundBlocks(1.6971, 2), 3);
  EXPECT_EQ(RoundBlocks(1.6971, 1), 2);
  EXPECT_EQ(RoundChannels(1.3185, 16), 24);
  EXPECT_EQ(RoundChannels(1.3185, 128), 168);
  EXPECT_EQ(RoundChannels(0.1, 8), 8);
}

TEST(ScalingTest, ScaledSpecKeepsStridesAndKernels) {
  const ArchSpec m = CompoundScale(EvoPose2DSGenotype(), 384);
  EXPECT_EQ(m.input_h, 384);
  EXPECT_EQ(m.input_w, 288);
  for (int r = 0; r < kNumModules; ++r) {
    EXPECT_EQ(m.modules[r].kernel, EvoPose2DSGenotype().kernel(r));
    EXPECT_EQ(m.modules[r].stride, EvoPose2DSGenotype().stride(r));
    EXPECT_EQ(m.modules[r].blocks, RoundBlocks(ComputeScaling(384).c_d,
                                               EvoPose2DSGenotype().blocks(r)));
  }
}

}  // namespace
}  // namespace evopose
