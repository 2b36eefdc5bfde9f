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

#include "evopose/dataset.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evopose/error.h"
#include "evopose/hashing.h"
#include "evopose/serialization.h"

namespace evopose {
namespace {

namespace fs = std::filesystem;

constexpr char kShardMagic[4] = {'E', 'V', 'O', 'D'};
constexpr uint32_t kShardVersion = 1;

enum Joint {
  kHead, kNeck, kLShoulder, kRShoulder, kLElbow, kRElbow, kLWrist, kRWrist,
  kLHip, kRHip, kLKnee, kRKnee, kLAnkle, kRAnkle,
};

struct Rgb {
  double r, g, b;
};

// Joint pairs share a color.
constexpr std::array<Rgb, kSkeletonSize> kJointColors = {{
    {255, 255, 255}, {255, 255, 120}, {255, 110, 110}, {255, 110, 110},
    {110, 255, 110}, {110, 255, 110}, {110, 170, 255}, {110, 170, 255},
    {255, 170, 60},  {255, 170, 60},  {200, 110, 255}, {200, 110, 255},
    {110, 255, 255}, {110, 255, 255},
}};

constexpr std::array<std::pair<int, int>, 14> kBones = {{
    {kHead, kNeck}, {kNeck, kLShoulder}, {kNeck, kRShoulder}, {kLShoulder, kLElbow},
    {kRShoulder, kRElbow}, {kLElbow, kLWrist}, {kRElbow, kRWrist}, {kLShoulder, kLHip},
    {kRShoulder, kRHip}, {kLHip, kRHip}, {kLHip, kLKnee}, {kRHip, kRKnee},
    {kLKnee, kLAnkle}, {kRKnee, kRAnkle},
}};

class Uniform {
 public:
  explicit Uniform(uint64_t seed) : rng_(seed) {}
  // Platform-independent: 53 random bits scaled to [lo, hi).
  double operator()(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }
  bool Chance(double p) { return (*this)(0.0, 1.0) < p; }

 private:
  std::mt19937_64 rng_;
};

struct Vec {
  double x, y;
};
Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
Vec operator*(double s, Vec a) { return {s * a.x, s * a.y}; }
Vec Rotate(Vec a, double t) {
  return {a.x * std::cos(t) - a.y * std::sin(t), a.x * std::sin(t) + a.y * std::cos(t)};
}

class Canvas {
 public:
  Canvas(int64_t h, int64_t w) : h_(h), w_(w), px_(h * w * 3, 0.0) {}

  void Blend(int64_t row, int64_t col, const Rgb& c, double a) {
    if (row < 0 || col < 0 || row >= h_ || col >= w_ || a <= 0.0) return;
    double* p = &px_[(row * w_ + col) * 3];
    p[0] += a * (c.r - p[0]);
    p[1] += a * (c.g - p[1]);
    p[2] += a * (c.b - p[2]);
  }
  void Set(int64_t row, int64_t col, const Rgb& c) { Blend(row, col, c, 1.0); }

  // Thick anti-aliased segment: coverage falls off over one pixel at the edge.
  void Segment(Vec a, Vec b, double radius, const Rgb& c) {
    const int64_t r0 = static_cast<int64_t>(std::floor(std::min(a.y, b.y) - radius - 1));
    const int64_t r1 = static_cast<int64_t>(std::ceil(std::max(a.y, b.y) + radius + 1));
    const int64_t c0 = static_cast<int64_t>(std::floor(std::min(a.x, b.x) - radius - 1));
    const int64_t c1 = static_cast<int64_t>(std::ceil(std::max(a.x, b.x) + radius + 1));
    const double dx = b.x - a.x, dy = b.y - a.y, len2 = dx * dx + dy * dy;
    for (int64_t row = r0; row <= r1; ++row) {
      for (int64_t col = c0; col <= c1; ++col) {
        double t = len2 > 0 ? ((col - a.x) * dx + (row - a.y) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double d = std::hypot(col - (a.x + t * dx), row - (a.y + t * dy));
        Blend(row, col, c, std::clamp(radius + 0.5 - d, 0.0, 1.0));
      }
    }
  }
  void Disk(Vec center, double radius, const Rgb& c) { Segment(center, center, radius, c); }

  std::vector<uint8_t> Pixels() const {
    std::vector<uint8_t> out(px_.size());
    for (size_t i = 0; i < px_.size(); ++i) {
      out[i] = static_cast<uint8_t>(std::clamp(std::lround(px_[i]), 0L, 255L));
    }
    return out;
  }

 private:
  int64_t h_, w_;
  std::vector<double> px_;
};

void Texture(Canvas& canvas, int64_t h, int64_t w, Uniform& u) {
  const Rgb base{u(30, 110), u(30, 110), u(30, 110)};
  const double gx = u(-25, 25) / static_cast<double>(w), gy = u(-25, 25) / static_cast<double>(h);
  const double freq = u(0.15, 0.6), phase = u(0, 6.283), angle = u(0, 3.1416), amp = u(4, 18);
  for (int64_t row = 0; row < h; ++row) {
    for (int64_t col = 0; col < w; ++col) {
      const double stripe =
          amp * std::sin(freq * (col * std::cos(angle) + row * std::sin(angle)) + phase);
      const double shade = gx * col + gy * row + stripe;
      canvas.Set(row, col, {base.r + shade + u(-8, 8), base.g + shade + u(-8, 8),
                            base.b + shade + u(-8, 8)});
    }
  }
}

double Quantize(double v) { return std::round(v * 64.0) / 64.0; }

void WriteU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void WriteU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(std::string_view bytes, std::string path) : bytes_(bytes), path_(std::move(path)) {}
  uint64_t Uint(int n) {
    Need(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t{static_cast<uint8_t>(bytes_[pos_ + i])} << (8 * i);
    pos_ += n;
    return v;
  }
  double F64() { return std::bit_cast<double>(Uint(8)); }
  std::string_view Bytes(size_t n) {
    Need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool Done() const { return pos_ == bytes_.size(); }

 private:
  void Need(size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError(path_ + ": truncated shard");
  }
  std::string_view bytes_;
  std::string path_;
  size_t pos_ = 0;
};

std::string EncodeShard(const std::vector<PoseSample>& samples, size_t begin, size_t end,
                        int64_t h, int64_t w, int k) {
  std::string out(kShardMagic, 4);
  WriteU32(out, kShardVersion);
  WriteU32(out, static_cast<uint32_t>(end - begin));
  WriteU32(out, static_cast<uint32_t>(h));
  WriteU32(out, static_cast<uint32_t>(w));
  WriteU32(out, static_cast<uint32_t>(k));
  for (size_t i = begin; i < end; ++i) {
    const auto& s = samples[i];
    WriteU64(out, static_cast<uint64_t>(s.id));
    out.append(reinterpret_cast<const char*>(s.pixels.data()), s.pixels.size());
    for (int j = 0; j < k; ++j) {
      WriteU64(out, std::bit_cast<uint64_t>(s.keypoints[j].x));
      WriteU64(out, std::bit_cast<uint64_t>(s.keypoints[j].y));
      out.push_back(static_cast<char>(s.visibility[j]));
    }
  }
  return out;
}

void DecodeShard(const std::string& path, std::vector<PoseSample>& out, int64_t h, int64_t w,
                 int k) {
  const std::string bytes = ReadFileBytes(path);
  Reader r(bytes, path);
  if (r.Bytes(4) != std::string_view(kShardMagic, 4)) throw IoError(path + ": not an EVOD shard");
  if (r.Uint(4) != kShardVersion) throw IoError(path + ": unsupported shard version");
  const uint64_t count = r.Uint(4);
  if (static_cast<int64_t>(r.Uint(4)) != h || static_cast<int64_t>(r.Uint(4)) != w ||
      static_cast<int>(r.Uint(4)) != k) {
    throw IoError(path + ": shard geometry differs from the index");
  }
  for (uint64_t i = 0; i < count; ++i) {
    PoseSample s;
    s.id = static_cast<int64_t>(r.Uint(8));
    s.height = h;
    s.width = w;
    const auto px = r.Bytes(static_cast<size_t>(h * w * 3));
    s.pixels.assign(px.begin(), px.end());
    for (int j = 0; j < k; ++j) {
      const double x = r.F64();
      const double y = r.F64();
      s.keypoints.push_back({x, y});
      s.visibility.push_back(static_cast<int>(r.Uint(1)));
    }
    out.push_back(std::move(s));
  }
  if (!r.Done()) throw IoError(path + ": trailing bytes after last sample");
}

nlohmann::json ConfigJson(const DatasetConfig& c) {
  return {{"train_samples", c.train_samples}, {"val_samples", c.val_samples},
          {"height", c.height},               {"width", c.width},
          {"keypoints", c.keypoints},         {"seed", c.seed},
          {"flip", c.flip},                   {"occlusion_prob", c.occlusion_prob}};
}

void ValidateSample(const PoseSample& s, const std::string& where) {
  if (static_cast<int64_t>(s.pixels.size()) != s.height * s.width * 3) {
    throw IoError(where + ": image has " + std::to_string(s.pixels.size()) +
                  " bytes, expected " + std::to_string(s.height * s.width * 3));
  }
  for (size_t j = 0; j < s.keypoints.size(); ++j) {
    const auto& p = s.keypoints[j];
    if (s.visibility[j] > 0 &&
        (p.x < 0 || p.y < 0 || p.x > s.width - 1 || p.y > s.height - 1)) {
      throw IoError(where + ": visible keypoint " + std::to_string(j) + " is outside the image");
    }
  }
}

std::vector<uint8_t> ReadPpm(const std::string& path, int64_t& h, int64_t& w) {
  const std::string bytes = ReadFileBytes(path);
  size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (token() != "P6") throw IoError(path + ": only binary PPM (P6) images are supported");
  try {
    w = std::stoll(token());
    h = std::stoll(token());
    if (std::stoi(token()) != 255) throw IoError(path + ": PPM maxval must be 255");
  } catch (const std::logic_error&) {
    throw IoError(path + ": malformed PPM header");
  }
  ++pos;
  const size_t n = static_cast<size_t>(h * w * 3);
  if (bytes.size() - pos != n) throw IoError(path + ": PPM pixel data has the wrong size");
  return {bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end()};
}

}  // namespace

const std::array<std::string_view, kSkeletonSize>& JointNames() {
  static const std::array<std::string_view, kSkeletonSize> names = {
      "head",       "neck",      "left_shoulder", "right_shoulder", "left_elbow",
      "right_elbow", "left_wrist", "right_wrist",  "left_hip",       "right_hip",
      "left_knee",  "right_knee", "left_ankle",   "right_ankle"};
  return names;
}

int FlipPartner(int joint, int keypoints) {
  if (joint < 2 || joint >= kSkeletonSize) return joint;
  const int partner = joint % 2 == 0 ? joint + 1 : joint - 1;
  return partner < keypoints ? partner : joint;
}

PoseSample GenerateSample(const DatasetConfig& config, int64_t id) {
  if (config.keypoints < 1 || config.keypoints > kSkeletonSize) {
    throw InvalidArgument("keypoints must be in [1, " + std::to_string(kSkeletonSize) +
                          "] for the synthetic skeleton, got " +
                          std::to_string(config.keypoints));
  }
  if (config.height < 8 || config.width < 8) {
    throw InvalidArgument("synthetic images must be at least 8x8");
  }
  const int64_t h = config.height, w = config.width;
  Uniform u(DeriveSeed(config.seed, "sample/" + std::to_string(id)));
  Canvas canvas(h, w);
  Texture(canvas, h, w, u);

  const double s = static_cast<double>(h) * u(0.75, 0.95);
  const double lean = u(-0.3, 0.3);
  const Vec up = Rotate({0.0, -1.0}, lean);
  const Vec down = -1.0 * up;
  const Vec right = Rotate({1.0, 0.0}, lean);  // the figure's left side
  const Vec neck{w / 2.0 + u(-0.1, 0.1) * w, h / 2.0 - 0.315 * s + u(-0.06, 0.06) * h};

  std::array<Vec, kSkeletonSize> j{};
  j[kNeck] = neck;
  j[kHead] = neck + (0.13 * s) * Rotate(up, u(-0.3, 0.3));
  const Vec pelvis = neck + (0.33 * s) * down;
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const Vec out = sign * right;
    j[kLShoulder + side] = neck + (0.11 * s) * out + (0.02 * s) * down;
    j[kLHip + side] = pelvis + (0.07 * s) * out;
    const double arm = u(-0.4, 2.6), bend = u(-0.3, 1.8);
    j[kLElbow + side] = j[kLShoulder + side] + (0.16 * s) * Rotate(down, -sign * arm);
    j[kLWrist + side] = j[kLElbow + side] + (0.15 * s) * Rotate(down, -sign * (arm + bend));
    const double leg = u(-0.2, 0.7), knee = u(-0.8, 0.1);
    j[kLKnee + side] = j[kLHip + side] + (0.22 * s) * Rotate(down, -sign * leg);
    j[kLAnkle + side] = j[kLKnee + side] + (0.21 * s) * Rotate(down, -sign * (leg + knee));
  }

  const double gray = u(150, 210);
  const Rgb limb{gray + u(-15, 15), gray + u(-15, 15), gray + u(-15, 15)};
  const double thickness = std::max(0.6, s / 50.0);
  for (const auto& [a, b] : kBones) canvas.Segment(j[a], j[b], thickness, limb);
  for (int k = 0; k < kSkeletonSize; ++k) canvas.Disk(j[k], thickness * 1.4, kJointColors[k]);

  PoseSample sample;
  sample.id = id;
  sample.height = h;
  sample.width = w;
  std::vector<std::array<double, 4>> occluders;  // x0, y0, x1, y1
  for (int k = 0; k < config.keypoints; ++k) {
    if (!u.Chance(config.occlusion_prob)) continue;
    const double half = 0.06 * s;
    const double cx = j[k].x + u(-1.5, 1.5), cy = j[k].y + u(-1.5, 1.5);
    occluders.push_back({cx - half, cy - half, cx + half, cy + half});
    const Rgb fill{u(20, 120), u(20, 120), u(20, 120)};
    for (int64_t row = static_cast<int64_t>(std::floor(cy - half));
         row <= static_cast<int64_t>(std::ceil(cy + half)); ++row) {
      for (int64_t col = static_cast<int64_t>(std::floor(cx - half));
           col <= static_cast<int64_t>(std::ceil(cx + half)); ++col) {
        canvas.Set(row, col, {fill.r + u(-10, 10), fill.g + u(-10, 10), fill.b + u(-10, 10)});
      }
    }
  }
  for (int k = 0; k < config.keypoints; ++k) {
    const Keypoint p{Quantize(j[k].x), Quantize(j[k].y)};
    bool visible = p.x >= 0 && p.y >= 0 && p.x <= w - 1 && p.y <= h - 1;
    for (const auto& o : occluders) {
      if (p.x >= std::floor(o[0]) - 0.5 && p.x <= std::ceil(o[2]) + 0.5 &&
          p.y >= std::floor(o[1]) - 0.5 && p.y <= std::ceil(o[3]) + 0.5) {
        visible = false;
      }
    }
    sample.keypoints.push_back(p);
    sample.visibility.push_back(visible ? 2 : 0);
  }
  sample.pixels = canvas.Pixels();
  return sample;
}

Dataset GenerateDataset(const DatasetConfig& config) {
  if (config.train_samples < 1) throw InvalidArgument("train_samples must be at least 1");
  if (config.val_samples < 1) throw InvalidArgument("val_samples must be at least 1");
  Dataset d;
  d.config = config;
  for (int64_t i = 0; i < config.train_samples; ++i) d.train.push_back(GenerateSample(config, i));
  for (int64_t i = 0; i < config.val_samples; ++i) {
    d.val.push_back(GenerateSample(config, config.train_samples + i));
  }
  d.norm = ComputeNormalization(d.train);
  return d;
}

Normalization ComputeNormalization(const std::vector<PoseSample>& samples) {
  if (samples.empty()) throw InvalidArgument("cannot normalize an empty split");
  std::array<double, 3> sum{}, sq{};
  int64_t count = 0;
  for (const auto& s : samples) {
    for (size_t i = 0; i < s.pixels.size(); i += 3) {
      for (int c = 0; c < 3; ++c) {
        const double v = s.pixels[i + c] / 255.0;
        sum[c] += v;
        sq[c] += v * v;
      }
      ++count;
    }
  }
  Normalization n;
  for (int c = 0; c < 3; ++c) {
    n.mean[c] = sum[c] / static_cast<double>(count);
    const double var = sq[c] / static_cast<double>(count) - n.mean[c] * n.mean[c];
    n.stddev[c] = std::sqrt(std::max(var, 1e-12));
  }
  return n;
}

PoseSample FlipSample(const PoseSample& s) {
  PoseSample out = s;
  for (int64_t row = 0; row < s.height; ++row) {
    for (int64_t col = 0; col < s.width; ++col) {
      for (int c = 0; c < 3; ++c) {
        out.pixels[(row * s.width + col) * 3 + c] =
            s.pixels[(row * s.width + (s.width - 1 - col)) * 3 + c];
      }
    }
  }
  const int k = static_cast<int>(s.keypoints.size());
  for (int j = 0; j < k; ++j) {
    const int src = FlipPartner(j, k);
    out.keypoints[j] = {static_cast<double>(s.width - 1) - s.keypoints[src].x,
                        s.keypoints[src].y};
    out.visibility[j] = s.visibility[src];
  }
  return out;
}

Batch MakeBatch(const std::vector<const PoseSample*>& samples, const Normalization& norm) {
  if (samples.empty()) throw InvalidArgument("empty batch");
  const int64_t h = samples[0]->height, w = samples[0]->width;
  Batch b;
  b.images = Tensor({static_cast<int64_t>(samples.size()), h, w, 3});
  double* dst = b.images.raw();
  for (const PoseSample* s : samples) {
    if (s->height != h || s->width != w) throw ShapeError("batch mixes image sizes");
    for (size_t i = 0; i < s->pixels.size(); ++i) {
      const int c = static_cast<int>(i % 3);
      *dst++ = (s->pixels[i] / 255.0 - norm.mean[c]) / norm.stddev[c];
    }
    b.keypoints.push_back(s->keypoints);
    b.visibility.push_back(s->visibility);
  }
  return b;
}

void SaveDataset(const std::string& dir, const Dataset& d, int64_t shard_size) {
  if (shard_size < 1) throw InvalidArgument("shard size must be positive");
  fs::create_directories(dir);
  nlohmann::json index;
  index["format"] = "EVOD";
  index["version"] = kShardVersion;
  index["height"] = d.config.height;
  index["width"] = d.config.width;
  index["keypoints"] = d.config.keypoints;
  index["config"] = ConfigJson(d.config);
  index["mean"] = d.norm.mean;
  index["std"] = d.norm.stddev;
  index["shards"] = nlohmann::json::array();
  for (const auto& [name, split] : {std::pair{"train", &d.train}, std::pair{"val", &d.val}}) {
    for (size_t begin = 0, n = 0; begin < split->size(); begin += shard_size, ++n) {
      const size_t end = std::min(split->size(), begin + static_cast<size_t>(shard_size));
      char file[64];
      std::snprintf(file, sizeof(file), "%s_%04zu.evod", name, n);
      const std::string bytes = EncodeShard(*split, begin, end, d.config.height,
                                            d.config.width, d.config.keypoints);
      WriteFileAtomic((fs::path(dir) / file).string(), bytes);
      index["shards"].push_back(
          {{"file", file}, {"split", name}, {"count", end - begin}, {"sha256", Sha256Hex(bytes)}});
    }
  }
  WriteFileAtomic((fs::path(dir) / "index.json").string(), index.dump(2) + "\n");
}

bool DatasetExists(const std::string& dir) { return fs::exists(fs::path(dir) / "index.json"); }

Dataset LoadDataset(const std::string& dir) {
  const std::string index_path = (fs::path(dir) / "index.json").string();
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(ReadFileBytes(index_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(index_path + ": " + e.what());
  }
  Dataset d;
  try {
    if (index.at("format") != "EVOD" || index.at("version") != kShardVersion) {
      throw IoError(index_path + ": unsupported dataset format");
    }
    const auto& c = index.at("config");
    d.config.train_samples = c.at("train_samples");
    d.config.val_samples = c.at("val_samples");
    d.config.height = c.at("height");
    d.config.width = c.at("width");
    d.config.keypoints = c.at("keypoints");
    d.config.seed = c.at("seed");
    d.config.flip = c.at("flip");
    d.config.occlusion_prob = c.at("occlusion_prob");
    d.norm.mean = index.at("mean");
    d.norm.stddev = index.at("std");
    for (const auto& shard : index.at("shards")) {
      const std::string path = (fs::path(dir) / shard.at("file").get<std::string>()).string();
      if (Sha256File(path) != shard.at("sha256").get<std::string>()) {
        throw IoError(path + ": checksum mismatch");
      }
      auto& split = shard.at("split") == "train" ? d.train : d.val;
      const size_t before = split.size();
      DecodeShard(path, split, d.config.height, d.config.width, d.config.keypoints);
      if (split.size() - before != shard.at("count").get<size_t>()) {
        throw IoError(path + ": sample count differs from the index");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(index_path + ": " + e.what());
  }
  if (d.train.empty() || d.val.empty()) throw IoError(index_path + ": dataset has an empty split");
  return d;
}

Dataset ImportDirectory(const std::string& dir, int keypoints) {
  Dataset d;
  d.config.keypoints = keypoints;
  for (const auto& [name, split] : {std::pair{"train", &d.train}, std::pair{"val", &d.val}}) {
    const fs::path images = fs::path(dir) / name / "images";
    if (!fs::is_directory(images)) throw IoError(images.string() + ": missing directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(images)) {
      if (e.path().extension() == ".ppm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      PoseSample s;
      const std::string stem = f.stem().string();
      try {
        s.id = std::stoll(stem);
      } catch (const std::logic_error&) {
        throw IoError(f.string() + ": file name must be a numeric sample id");
      }
      s.pixels = ReadPpm(f.string(), s.height, s.width);
      const fs::path ann = fs::path(dir) / name / "annotations" / (stem + ".txt");
      std::istringstream in(ReadFileBytes(ann.string()));
      double x, y;
      int v;
      while (in >> x >> y >> v) {
        s.keypoints.push_back({x, y});
        s.visibility.push_back(v);
      }
      if (!in.eof()) throw IoError(ann.string() + ": expected 'x y v' lines");
      if (static_cast<int>(s.keypoints.size()) != keypoints) {
        throw IoError(ann.string() + ": " + std::to_string(s.keypoints.size()) +
                      " keypoints, expected " + std::to_string(keypoints));
      }
      ValidateSample(s, ann.string());
      split->push_back(std::move(s));
    }
  }
  if (d.train.empty() || d.val.empty()) throw IoError(dir + ": dataset has an empty split");
  d.config.height = d.train[0].height;
  d.config.width = d.train[0].width;
  d.config.train_samples = static_cast<int64_t>(d.train.size());
  d.config.val_samples = static_cast<int64_t>(d.val.size());
  for (const auto* split : {&d.train, &d.val}) {
    for (const auto& s : *split) {
      if (s.height != d.config.height || s.width != d.config.width) {
        throw IoError(dir + ": sample " + std::to_string(s.id) + " has a different image size");
      }
    }
  }
  d.norm = ComputeNormalization(d.train);
  return d;
}

}  // namespace evopose
