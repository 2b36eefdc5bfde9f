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

#include "evopose/heatmap.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evopose/error.h"

namespace evopose {
namespace {

void CheckKeypoints(const std::vector<Keypoint>& keypoints, const std::vector<int>& visibility) {
  if (keypoints.size() != visibility.size()) {
    throw InvalidArgument(std::to_string(keypoints.size()) + " keypoints but " +
                          std::to_string(visibility.size()) + " visibility flags");
  }
}

void CheckMaps(const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw ShapeError(std::string(what) + " must be (h', w', K), got " +
                     ShapeToString(t.shape()));
  }
}

}  // namespace

void RenderTargetsInto(const std::vector<Keypoint>& keypoints,
                       const std::vector<int>& visibility, int64_t image_h, int64_t image_w,
                       Tensor& out, int64_t n) {
  CheckKeypoints(keypoints, visibility);
  const int64_t hh = out.dim(1), hw = out.dim(2), k = out.dim(3);
  if (k != static_cast<int64_t>(keypoints.size())) {
    throw ShapeError("target channel dim 3 is " + std::to_string(k) + " but " +
                     std::to_string(keypoints.size()) + " keypoints were given");
  }
  const double sy = static_cast<double>(image_h) / static_cast<double>(hh);
  const double sx = static_cast<double>(image_w) / static_cast<double>(hw);
  const double sigma = HeatmapSigma(hh);
  const double denom = 2.0 * sigma * sigma;
  double* base = out.raw() + n * hh * hw * k;
  for (int64_t j = 0; j < k; ++j) {
    const bool on = visibility[j] > 0;
    for (int64_t v = 0; v < hh; ++v) {
      const double dy = ((v + 0.5) * sy - (keypoints[j].y + 0.5)) / sy;
      for (int64_t u = 0; u < hw; ++u) {
        const double dx = ((u + 0.5) * sx - (keypoints[j].x + 0.5)) / sx;
        base[(v * hw + u) * k + j] = on ? kHeatmapPeak * std::exp(-(dx * dx + dy * dy) / denom)
                                        : 0.0;
      }
    }
  }
}

Tensor RenderTargets(const std::vector<Keypoint>& keypoints, const std::vector<int>& visibility,
                     int64_t image_h, int64_t image_w, int64_t heatmap_h, int64_t heatmap_w) {
  Tensor out({1, heatmap_h, heatmap_w, static_cast<int64_t>(keypoints.size())});
  RenderTargetsInto(keypoints, visibility, image_h, image_w, out, 0);
  return out.Reshaped({heatmap_h, heatmap_w, static_cast<int64_t>(keypoints.size())});
}

double SampleLoss(const Tensor& pred, const Tensor& target, const std::vector<int>& visibility) {
  CheckMaps(pred, "prediction");
  CheckSameShape(pred, target, "sample loss");
  const int64_t k = pred.dim(2);
  if (static_cast<int64_t>(visibility.size()) != k) {
    throw ShapeError("prediction has " + std::to_string(k) + " channels but " +
                     std::to_string(visibility.size()) + " visibility flags were given");
  }
  double total = 0.0;
  for (int64_t i = 0; i < static_cast<int64_t>(pred.size()); ++i) {
    const double p = pred[i];
    if (std::isnan(p)) throw DivergenceError("NaN in predicted heatmaps");
    if (visibility[i % k] > 0) {
      const double d = p - target[i];
      total += d * d;
    }
  }
  return total / static_cast<double>(k);
}

BatchLoss BatchSampleLoss(const Tensor& pred, const Tensor& target,
                          const std::vector<std::vector<int>>& visibility) {
  CheckSameShape(pred, target, "batch loss");
  if (pred.rank() != 4) {
    throw ShapeError("batched prediction must be (N, h', w', K), got " +
                     ShapeToString(pred.shape()));
  }
  const int64_t n = pred.dim(0), k = pred.dim(3), per = pred.size() / std::max<int64_t>(n, 1);
  if (static_cast<int64_t>(visibility.size()) != n) {
    throw ShapeError("batch of " + std::to_string(n) + " has " +
                     std::to_string(visibility.size()) + " visibility rows");
  }
  if (n == 0) throw InvalidArgument("empty batch");
  BatchLoss out;
  out.grad = Tensor(pred.shape());
  out.per_sample.assign(n, 0.0);
  const double inv_k = 1.0 / static_cast<double>(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int64_t s = 0; s < n; ++s) {
    if (static_cast<int64_t>(visibility[s].size()) != k) {
      throw ShapeError("visibility row " + std::to_string(s) + " has " +
                       std::to_string(visibility[s].size()) + " flags, expected " +
                       std::to_string(k));
    }
    double total = 0.0;
    for (int64_t i = s * per; i < (s + 1) * per; ++i) {
      const double p = pred[i];
      if (std::isnan(p)) throw DivergenceError("NaN in predicted heatmaps");
      if (visibility[s][i % k] > 0) {
        const double d = p - target[i];
        total += d * d;
        out.grad[i] = 2.0 * d * inv_k * inv_n;
      }
    }
    out.per_sample[s] = total * inv_k;
    out.loss += out.per_sample[s];
  }
  out.loss *= inv_n;
  return out;
}

namespace {

constexpr double kOutside = -std::numeric_limits<double>::infinity();

// +0.25 toward the larger neighbor, 0 on ties. A neighbor outside the map is
// extrapolated from a Gaussian of width sigma through the peak and the other
// neighbor: n_out = peak^2 / n_in * exp(-1 / sigma^2).
double QuarterShift(double peak, double lo, double hi, double sigma) {
  if (lo == kOutside && hi == kOutside) return 0.0;
  if (lo != kOutside && hi != kOutside) return hi > lo ? 0.25 : (lo > hi ? -0.25 : 0.0);
  const double inside = lo == kOutside ? hi : lo;
  if (peak <= 0.0 || inside <= 0.0) return 0.0;
  // log(inside / outside) = 2 log(inside / peak) + 1 / sigma^2, compared with a tie band.
  const double margin = 2.0 * std::log(inside / peak) + 1.0 / (sigma * sigma);
  if (std::abs(margin) <= 1e-9) return 0.0;
  const double toward_inside = margin > 0.0 ? 0.25 : -0.25;
  return lo == kOutside ? toward_inside : -toward_inside;
}

}  // namespace

std::vector<DecodedKeypoint> DecodeKeypoints(const Tensor& heatmaps, int64_t image_h,
                                             int64_t image_w) {
  CheckMaps(heatmaps, "heatmaps");
  const int64_t hh = heatmaps.dim(0), hw = heatmaps.dim(1), k = heatmaps.dim(2);
  const double sy = static_cast<double>(image_h) / static_cast<double>(hh);
  const double sx = static_cast<double>(image_w) / static_cast<double>(hw);
  auto at = [&](int64_t v, int64_t u, int64_t j) { return heatmaps[(v * hw + u) * k + j]; };
  const double sigma = HeatmapSigma(hh);
  std::vector<DecodedKeypoint> out(k);
  for (int64_t j = 0; j < k; ++j) {
    int64_t bv = 0, bu = 0;
    double best = at(0, 0, j);
    for (int64_t v = 0; v < hh; ++v) {
      for (int64_t u = 0; u < hw; ++u) {
        if (at(v, u, j) > best) {
          best = at(v, u, j);
          bv = v;
          bu = u;
        }
      }
    }
    double u = static_cast<double>(bu), v = static_cast<double>(bv);
    u += QuarterShift(best, bu > 0 ? at(bv, bu - 1, j) : kOutside,
                      bu + 1 < hw ? at(bv, bu + 1, j) : kOutside, sigma);
    v += QuarterShift(best, bv > 0 ? at(bv - 1, bu, j) : kOutside,
                      bv + 1 < hh ? at(bv + 1, bu, j) : kOutside, sigma);
    out[j] = {(u + 0.5) * sx - 0.5, (v + 0.5) * sy - 0.5, best};
  }
  return out;
}

std::vector<DecodedKeypoint> DecodeKeypoints(const Tensor& heatmaps, int output_stride) {
  CheckMaps(heatmaps, "heatmaps");
  return DecodeKeypoints(heatmaps, heatmaps.dim(0) * output_stride,
                         heatmaps.dim(1) * output_stride);
}

double Pck(const std::vector<Keypoint>& pred, const std::vector<Keypoint>& gt,
           const std::vector<int>& visibility, int64_t image_h, int64_t image_w,
           double threshold_fraction) {
  if (threshold_fraction <= 0.0) throw InvalidArgument("PCK threshold must be positive");
  if (pred.size() != gt.size() || gt.size() != visibility.size()) {
    throw InvalidArgument("PCK inputs differ in length");
  }
  const double threshold =
      threshold_fraction * std::hypot(static_cast<double>(image_h), static_cast<double>(image_w));
  int64_t visible = 0, correct = 0;
  for (size_t j = 0; j < gt.size(); ++j) {
    if (visibility[j] <= 0) continue;
    ++visible;
    if (std::hypot(pred[j].x - gt[j].x, pred[j].y - gt[j].y) <= threshold) ++correct;
  }
  if (visible == 0) throw InvalidArgument("PCK needs at least one visible keypoint");
  return static_cast<double>(correct) / static_cast<double>(visible);
}

}  // namespace evopose
