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
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "evopose/arch_spec.h"
#include "evopose/dataset.h"
#include "evopose/error.h"
#include "evopose/genotype.h"
#include "evopose/heatmap.h"
#include "evopose/network.h"
#include "evopose/serialization.h"
#include "evopose/trainer.h"
#include "test_util.h"

namespace evopose {
namespace {

namespace fs = std::filesystem;
using testing::RandomTensor;

DatasetConfig SmallConfig(uint64_t seed = 1) {
  DatasetConfig c;
  c.train_samples = 12;
  c.val_samples = 6;
  c.seed = seed;
  return c;
}

BuildOptions ToyOptions() {
  BuildOptions o;
  o.channel_unit = 2;
  o.stem_channels = 16;
  o.head_channels = 32;
  return o;
}

TEST(DatasetTest, SameSeedIsBitIdentical) {
  const Dataset a = GenerateDataset(SmallConfig(3)), b = GenerateDataset(SmallConfig(3));
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.norm, b.norm);
  EXPECT_NE(GenerateDataset(SmallConfig(4)).train, a.train);
}

TEST(DatasetTest, VisibleKeypointsInsideImage) {
  DatasetConfig c = SmallConfig(5);
  c.train_samples = 200;
  c.occlusion_prob = 0.3;
  int hidden = 0;
  for (const auto& s : GenerateDataset(c).train) {
    ASSERT_EQ(s.pixels.size(), static_cast<size_t>(64 * 48 * 3));
    for (size_t j = 0; j < s.keypoints.size(); ++j) {
      ASSERT_TRUE(s.visibility[j] == 0 || s.visibility[j] == 2);
      if (s.visibility[j] == 0) {
        ++hidden;
        continue;
      }
      EXPECT_GE(s.keypoints[j].x, 0.0);
      EXPECT_GE(s.keypoints[j].y, 0.0);
      EXPECT_LE(s.keypoints[j].x, 47.0);
      EXPECT_LE(s.keypoints[j].y, 63.0);
    }
  }
  EXPECT_GT(hidden, 0);
}

TEST(DatasetTest, SplitsAreDisjoint) {
  const Dataset d = GenerateDataset(SmallConfig());
  std::set<int64_t> train;
  for (const auto& s : d.train) train.insert(s.id);
  for (const auto& s : d.val) EXPECT_EQ(train.count(s.id), 0u);
}

TEST(DatasetTest, TooManyKeypointsIsAnError) {
  DatasetConfig c = SmallConfig();
  c.keypoints = kSkeletonSize + 1;
  EXPECT_THROW(GenerateDataset(c), InvalidArgument);
}

TEST(DatasetTest, NormalizationAppliedOnce) {
  const Dataset d = GenerateDataset(SmallConfig());
  std::vector<const PoseSample*> all;
  for (const auto& s : d.train) all.push_back(&s);
  const Batch b = MakeBatch(all, d.norm);
  double mean[3] = {0, 0, 0};
  for (size_t i = 0; i < b.images.size(); ++i) mean[i % 3] += b.images[i];
  for (double m : mean) EXPECT_NEAR(m / (b.images.size() / 3), 0.0, 1e-9);
}

TEST(DatasetTest, ShardRoundTrip) {
  const Dataset d = GenerateDataset(SmallConfig(7));
  const std::string dir = testing::TempDir("shards");
  SaveDataset(dir, d, 5);
  EXPECT_TRUE(DatasetExists(dir));
  EXPECT_TRUE(fs::exists(dir + "/train_0002.evod"));
  const Dataset back = LoadDataset(dir);
  EXPECT_EQ(back.train, d.train);
  EXPECT_EQ(back.val, d.val);
  EXPECT_EQ(back.norm, d.norm);
  EXPECT_EQ(back.config, d.config);
}

TEST(DatasetTest, CorruptShardIsDetected) {
  const std::string dir = testing::TempDir("shards_corrupt");
  SaveDataset(dir, GenerateDataset(SmallConfig(8)), 64);
  std::string bytes = ReadFileBytes(dir + "/val_0000.evod");
  bytes[bytes.size() / 2] ^= 1;
  WriteFileAtomic(dir + "/val_0000.evod", bytes);
  try {
    LoadDataset(dir);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("val_0000.evod"), std::string::npos) << e.what();
  }
}

void WritePpm(const fs::path& path, const PoseSample& s) {
  std::ofstream out(path, std::ios::binary);
  out << "P6\n" << s.width << " " << s.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(s.pixels.data()), static_cast<std::streamsize>(s.pixels.size()));
}

TEST(DatasetTest, ImportDirectoryLayout) {
  const Dataset d = GenerateDataset(SmallConfig(9));
  const fs::path root = testing::TempDir("import");
  for (const auto& [name, split] : {std::pair{"train", &d.train}, std::pair{"val", &d.val}}) {
    fs::create_directories(root / name / "images");
    fs::create_directories(root / name / "annotations");
    for (const auto& s : *split) {
      WritePpm(root / name / "images" / (std::to_string(s.id) + ".ppm"), s);
      std::ofstream ann(root / name / "annotations" / (std::to_string(s.id) + ".txt"));
      ann.precision(17);
      for (size_t j = 0; j < s.keypoints.size(); ++j) {
        ann << s.keypoints[j].x << " " << s.keypoints[j].y << " " << s.visibility[j] << "\n";
      }
    }
  }
  const Dataset back = ImportDirectory(root.string(), 8);
  ASSERT_EQ(back.train.size(), d.train.size());
  std::set<int64_t> ids;
  for (const auto& s : back.train) ids.insert(s.id);
  for (const auto& s : d.train) {
    ASSERT_TRUE(ids.count(s.id));
  }
  for (const auto& s : back.train) {
    const auto& orig = d.train[s.id];
    EXPECT_EQ(s.pixels, orig.pixels);
    EXPECT_EQ(s.keypoints, orig.keypoints);
  }
  EXPECT_THROW(ImportDirectory(root.string(), 7), IoError);
}

TEST(HeatmapTest, SigmaFromHeight) {
  EXPECT_EQ(HeatmapSigma(128), 2.0);
  EXPECT_EQ(HeatmapSigma(64), 1.0);
}

TEST(HeatmapTest, GridAlignedKeypointPeaks) {
  // Heatmap cell (10, 7) at stride 2 is centered on input pixel (14.5, 20.5).
  const Tensor t = RenderTargets({{14.5, 20.5}}, {2}, 256, 192, 128, 96);
  EXPECT_EQ(t.at({10, 7, 0}), 255.0);
}

TEST(HeatmapTest, GaussianMassMatchesIntegral) {
  const Tensor t = RenderTargets({{95.5, 127.5}, {10.0, 10.0}}, {2, 0}, 256, 192, 128, 96);
  double sum = 0, hidden = 0;
  for (int64_t i = 0; i < 128 * 96; ++i) {
    sum += t[2 * i];
    hidden += t[2 * i + 1];
  }
  const double want = 255.0 * 2.0 * std::numbers::pi * 4.0;
  EXPECT_NEAR(sum, want, 0.01 * want);
  EXPECT_EQ(hidden, 0.0);
}

TEST(LossTest, PerfectPredictionIsZero) {
  const Tensor t = RenderTargets({{3, 4}, {9, 20}}, {2, 2}, 64, 48, 16, 12);
  EXPECT_EQ(SampleLoss(t, t, {2, 2}), 0.0);
}

TEST(LossTest, InvisibleKeypointsIgnored) {
  const Tensor t = RenderTargets({{3, 4}, {9, 20}}, {0, 0}, 64, 48, 16, 12);
  EXPECT_EQ(SampleLoss(RandomTensor(t.shape(), 1, -100, 100), t, {0, 0}), 0.0);
}

TEST(LossTest, UniformErrorClosedForm) {
  const int64_t h = 16, w = 12, n = h * w;
  const double eps = 0.75;
  Tensor target({h, w, 2}), pred({h, w, 2});
  for (int64_t i = 0; i < n; ++i) pred[2 * i] = eps;
  EXPECT_DOUBLE_EQ(SampleLoss(pred, target, {2, 0}), n * eps * eps / 2.0);
}

TEST(LossTest, NanIsDivergence) {
  Tensor t({2, 2, 1}), p({2, 2, 1});
  p[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SampleLoss(p, t, {2}), DivergenceError);
}

TEST(LossTest, BatchGradientMatchesFiniteDifferences) {
  const Tensor target = RandomTensor({2, 3, 3, 2}, 2, 0, 255);
  Tensor pred = RandomTensor(target.shape(), 3, 0, 255);
  const std::vector<std::vector<int>> vis = {{2, 0}, {1, 2}};
  const BatchLoss l = BatchSampleLoss(pred, target, vis);
  const double h = 1e-5;
  double diff = 0, norm = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double orig = pred[i];
    pred[i] = orig + h;
    const double up = BatchSampleLoss(pred, target, vis).loss;
    pred[i] = orig - h;
    const double down = BatchSampleLoss(pred, target, vis).loss;
    pred[i] = orig;
    const double num = (up - down) / (2 * h);
    diff += (num - l.grad[i]) * (num - l.grad[i]);
    norm += num * num;
  }
  EXPECT_LT(std::sqrt(diff / norm), 1e-4);
}

TEST(LossTest, BatchMeanOfSampleLosses) {
  const Tensor target = RandomTensor({3, 4, 4, 2}, 4, 0, 255);
  const Tensor pred = RandomTensor(target.shape(), 5, 0, 255);
  const std::vector<std::vector<int>> vis = {{2, 2}, {0, 2}, {2, 0}};
  const BatchLoss l = BatchSampleLoss(pred, target, vis);
  double mean = 0;
  for (int s = 0; s < 3; ++s) {
    Tensor p({4, 4, 2}), t({4, 4, 2});
    std::copy(pred.raw() + s * 32, pred.raw() + (s + 1) * 32, p.raw());
    std::copy(target.raw() + s * 32, target.raw() + (s + 1) * 32, t.raw());
    const double single = SampleLoss(p, t, vis[s]);
    EXPECT_NEAR(l.per_sample[s], single, 1e-9);
    mean += single / 3;
  }
  EXPECT_NEAR(l.loss, mean, 1e-9);
}

class DatasetLossTest : public ::testing::Test {
 protected:
  DatasetLossTest()
      : data_(GenerateDataset(SmallConfig(11))),
        net_(BuildArchSpec(AncestorGenotype(), 64, 48, 8, ToyOptions()), 12) {}
  Dataset data_;
  Network net_;
};

TEST_F(DatasetLossTest, SingletonEqualsSampleLoss) {
  const PoseSample& s = data_.val[0];
  const Tensor pred = net_.Predict(MakeBatch({&s}, data_.norm).images);
  const Tensor maps = pred.Reshaped({pred.dim(1), pred.dim(2), pred.dim(3)});
  const Tensor target = RenderTargets(s.keypoints, s.visibility, 64, 48, maps.dim(0), maps.dim(1));
  EXPECT_NEAR(DatasetLoss(net_, {s}, data_.norm), SampleLoss(maps, target, s.visibility), 1e-9);
}

TEST_F(DatasetLossTest, DuplicatedSampleKeepsMean) {
  const std::vector<PoseSample> one = {data_.val[1]}, two = {data_.val[1], data_.val[1]};
  EXPECT_NEAR(DatasetLoss(net_, one, data_.norm), DatasetLoss(net_, two, data_.norm), 1e-9);
}

TEST_F(DatasetLossTest, BatchedMatchesSequential) {
  double seq = 0;
  for (const auto& s : data_.val) seq += DatasetLoss(net_, {s}, data_.norm, 1);
  seq /= static_cast<double>(data_.val.size());
  EXPECT_NEAR(DatasetLoss(net_, data_.val, data_.norm, 4), seq, 1e-9);
  EXPECT_NEAR(DatasetLoss(net_, data_.val, data_.norm, 32), seq, 1e-9);
}

TEST_F(DatasetLossTest, EmptySplitIsAnError) {
  EXPECT_THROW(DatasetLoss(net_, {}, data_.norm), InvalidArgument);
}

Tensor SinglePeak(double left, double right) {
  Tensor t({5, 5, 1});
  t.at({2, 2, 0}) = 10.0;
  t.at({2, 1, 0}) = left;
  t.at({2, 3, 0}) = right;
  return t;
}

TEST(DecodeTest, ShiftsTowardLargerNeighbor) {
  const auto d = DecodeKeypoints(SinglePeak(1.0, 2.0), 1);
  EXPECT_DOUBLE_EQ(d[0].x, 2.25);
  EXPECT_DOUBLE_EQ(d[0].y, 2.0);
  EXPECT_EQ(d[0].confidence, 10.0);
  EXPECT_DOUBLE_EQ(DecodeKeypoints(SinglePeak(2.0, 1.0), 1)[0].x, 1.75);
}

TEST(DecodeTest, SymmetricPeakHasNoOffset) {
  EXPECT_DOUBLE_EQ(DecodeKeypoints(SinglePeak(3.0, 3.0), 1)[0].x, 2.0);
}

TEST(DecodeTest, OutputStrideMapsToInputPixels) {
  // Cell 2 at stride 4 covers input pixels 8..11, centered on 9.5.
  EXPECT_DOUBLE_EQ(DecodeKeypoints(SinglePeak(3.0, 3.0), 4)[0].x, 9.5);
}

TEST(DecodeTest, GridAlignedRoundTrip) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const int64_t gu = 1 + rng() % 94, gv = 1 + rng() % 126;
    const Keypoint kp{2.0 * gu + 0.5, 2.0 * gv + 0.5};
    const auto d = DecodeKeypoints(RenderTargets({kp}, {2}, 256, 192, 128, 96), 2)[0];
    EXPECT_LE(std::hypot(d.x - kp.x, d.y - kp.y), 0.5);
  }
}

TEST(DecodeTest, BorderPeakUsesExtrapolatedNeighbor) {
  // Cell 0 centers sit at input 0.5; the missing outer neighbor is extrapolated.
  const Keypoint on_center{0.5, 0.5}, inward{1.3, 1.3}, outward{0.0, 0.0};
  for (const auto& [kp, want] : {std::pair{on_center, 0.5}, std::pair{inward, 1.0},
                                 std::pair{outward, 0.0}}) {
    const auto d = DecodeKeypoints(RenderTargets({kp}, {2}, 256, 192, 128, 96), 2)[0];
    EXPECT_DOUBLE_EQ(d.x, want);
    EXPECT_DOUBLE_EQ(d.y, want);
  }
  const Keypoint far_edge{190.9, 254.9};
  const auto d = DecodeKeypoints(RenderTargets({far_edge}, {2}, 256, 192, 128, 96), 2)[0];
  EXPECT_DOUBLE_EQ(d.x, 191.0);
  EXPECT_DOUBLE_EQ(d.y, 255.0);
}

TEST(DecodeTest, InvisibleChannelDoesNotChangeOthers) {
  const std::vector<Keypoint> kps = {{20, 30}, {5, 6}, {40, 50}};
  const Tensor a = RenderTargets(kps, {2, 2, 2}, 64, 48, 32, 24);
  const Tensor b = RenderTargets(kps, {2, 0, 2}, 64, 48, 32, 24);
  const auto da = DecodeKeypoints(a, 2), db = DecodeKeypoints(b, 2);
  EXPECT_EQ(da[0].x, db[0].x);
  EXPECT_EQ(da[2].confidence, db[2].confidence);
  EXPECT_EQ(db[1].confidence, 0.0);
}

TEST(PckTest, Examples) {
  const std::vector<Keypoint> gt = {{24, 32}, {20, 30}};
  EXPECT_EQ(Pck(gt, gt, {2, 2}, 64, 48), 1.0);
  EXPECT_EQ(Pck({{0, 0}, {0, 0}}, gt, {2, 2}, 64, 48, 0.05), 0.0);
  EXPECT_EQ(Pck({{24, 32}, {0, 0}}, gt, {2, 2}, 64, 48), 0.5);
}

TEST(PckTest, InvisibleIgnoredAndRequired) {
  const std::vector<Keypoint> gt = {{24, 32}, {20, 30}};
  EXPECT_EQ(Pck({{24, 32}, {0, 0}}, gt, {2, 0}, 64, 48), 1.0);
  EXPECT_THROW(Pck(gt, gt, {0, 0}, 64, 48), InvalidArgument);
  EXPECT_THROW(Pck(gt, gt, {2, 2}, 64, 48, 0.0), InvalidArgument);
}

Tensor FlipMaps(const Tensor& t) {
  const int64_t h = t.dim(0), w = t.dim(1), k = t.dim(2);
  Tensor out(t.shape());
  for (int64_t v = 0; v < h; ++v)
    for (int64_t u = 0; u < w; ++u)
      for (int64_t j = 0; j < k; ++j) {
        out.at({v, u, j}) = t.at({v, w - 1 - u, FlipPartner(static_cast<int>(j), static_cast<int>(k))});
      }
  return out;
}

TEST(FlipTest, RenderCommutesWithFlip) {
  DatasetConfig c = SmallConfig(14);
  c.keypoints = 14;
  c.train_samples = 30;
  for (const auto& s : GenerateDataset(c).train) {
    const PoseSample f = FlipSample(s);
    for (auto [hh, ww] : {std::pair{16, 16}, std::pair{16, 12}, std::pair{32, 24}}) {
      const Tensor direct = RenderTargets(f.keypoints, f.visibility, 64, 48, hh, ww);
      const Tensor flipped = FlipMaps(RenderTargets(s.keypoints, s.visibility, 64, 48, hh, ww));
      ASSERT_TRUE(direct == flipped) << "sample " << s.id << " " << hh << "x" << ww;
    }
    EXPECT_EQ(FlipSample(f), s);
  }
}

TEST(FlipTest, PartnerMap) {
  EXPECT_EQ(FlipPartner(0, 14), 0);
  EXPECT_EQ(FlipPartner(2, 14), 3);
  EXPECT_EQ(FlipPartner(13, 14), 12);
  EXPECT_EQ(FlipPartner(2, 3), 2);
}

TEST(EvaluateTest, PckAndLossInRange) {
  const Dataset d = GenerateDataset(SmallConfig(15));
  Network net(BuildArchSpec(AncestorGenotype(), 64, 48, 8, ToyOptions()), 16);
  const EvalResult r = Evaluate(net, d.val, d.norm);
  EXPECT_GE(r.pck, 0.0);
  EXPECT_LE(r.pck, 1.0);
  EXPECT_NEAR(r.loss, DatasetLoss(net, d.val, d.norm), 1e-9);
}

}  // namespace
}  // namespace evopose
