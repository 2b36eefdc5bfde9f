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

#include "evopose/weight_transfer.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "evopose/error.h"

namespace evopose {

int TransferCase(int64_t k_parent, int64_t k_child, int64_t i_parent, int64_t i_child) {
  if (k_child < k_parent) return i_child < i_parent ? 1 : 2;
  return i_child < i_parent ? 3 : 4;
}

Inheritance InheritConv(const Tensor& parent, const Tensor& fresh) {
  if (parent.rank() != 4 || fresh.rank() != 4) {
    throw ShapeError("conv inheritance needs rank-4 kernels, got " +
                     ShapeToString(parent.shape()) + " and " + ShapeToString(fresh.shape()));
  }
  const int64_t kp = parent.dim(0), kc = fresh.dim(0);
  if (parent.dim(1) != kp || fresh.dim(1) != kc) {
    throw ShapeError("conv inheritance needs square kernels");
  }
  if ((kp - kc) % 2 != 0) {
    throw InvalidArgument("kernel sizes " + std::to_string(kp) + " and " + std::to_string(kc) +
                          " differ in parity; the window cannot be centered");
  }
  const int64_t p = (kp - kc) / 2;
  const int64_t ip = parent.dim(2), ic = fresh.dim(2), op = parent.dim(3), oc = fresh.dim(3);
  const int64_t ni = std::min(ip, ic), no = std::min(op, oc);
  Inheritance out{fresh, TransferCase(kp, kc, ip, ic), 0};
  for (int64_t a = 0; a < kc; ++a) {
    const int64_t pa = a + p;
    if (pa < 0 || pa >= kp) continue;
    for (int64_t b = 0; b < kc; ++b) {
      const int64_t pb = b + p;
      if (pb < 0 || pb >= kp) continue;
      for (int64_t i = 0; i < ni; ++i) {
        const double* src = parent.raw() + ((pa * kp + pb) * ip + i) * op;
        double* dst = out.value.raw() + ((a * kc + b) * ic + i) * oc;
        std::copy(src, src + no, dst);
        out.inherited += no;
      }
    }
  }
  return out;
}

Inheritance InheritDense(const Tensor& parent, const Tensor& fresh) {
  Inheritance out{fresh, 4, 0};
  if (parent.rank() == 1 && fresh.rank() == 1) {
    const int64_t n = std::min(parent.dim(0), fresh.dim(0));
    std::copy(parent.raw(), parent.raw() + n, out.value.raw());
    out.inherited = n;
    out.transfer_case = TransferCase(1, 1, parent.dim(0), fresh.dim(0));
    return out;
  }
  if (parent.rank() != 2 || fresh.rank() != 2) {
    throw ShapeError("dense inheritance needs matching rank 1 or 2 tensors, got " +
                     ShapeToString(parent.shape()) + " and " + ShapeToString(fresh.shape()));
  }
  const int64_t ip = parent.dim(0), ic = fresh.dim(0), op = parent.dim(1), oc = fresh.dim(1);
  const int64_t ni = std::min(ip, ic), no = std::min(op, oc);
  for (int64_t i = 0; i < ni; ++i) {
    std::copy(parent.raw() + i * op, parent.raw() + i * op + no, out.value.raw() + i * oc);
  }
  out.inherited = ni * no;
  out.transfer_case = TransferCase(1, 1, ip, ic);
  return out;
}

Inheritance InheritBnVector(const Tensor& parent, int64_t child_width) {
  if (parent.rank() != 1) {
    throw ShapeError("batch norm vector must be rank 1, got " + ShapeToString(parent.shape()));
  }
  Inheritance out{Tensor({child_width}), TransferCase(1, 1, parent.dim(0), child_width), 0};
  const auto values = parent.data();
  const double mean =
      values.empty() ? 0.0
                     : std::accumulate(values.begin(), values.end(), 0.0) /
                           static_cast<double>(values.size());
  const int64_t n = std::min(parent.dim(0), child_width);
  for (int64_t c = 0; c < child_width; ++c) out.value[c] = c < n ? values[c] : mean;
  out.inherited = n;
  return out;
}

BatchNormParams InheritBn(const BatchNormParams& parent, int64_t child_width) {
  BatchNormParams out = parent;
  out.gamma = InheritBnVector(parent.gamma, child_width).value;
  out.beta = InheritBnVector(parent.beta, child_width).value;
  out.moving_mean = InheritBnVector(parent.moving_mean, child_width).value;
  out.moving_var = InheritBnVector(parent.moving_var, child_width).value;
  return out;
}

const TransferRecord& TransferReport::Find(const std::string& layer) const {
  for (const auto& r : records) {
    if (r.layer == layer) return r;
  }
  throw InvalidArgument("no transfer record for '" + layer + "'");
}

std::string TransferReport::ToCsv() const {
  std::ostringstream os;
  os << "layer,parent_shape,child_shape,case,inherited,total,fraction\n";
  auto shape = [](const Shape& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
    return out;
  };
  for (const auto& r : records) {
    os << r.layer << ',' << shape(r.parent_shape) << ',' << shape(r.child_shape) << ','
       << r.transfer_case << ',' << r.inherited << ',' << r.total << ',' << r.fraction()
       << '\n';
  }
  return os.str();
}

std::string AlignedParentName(const ArchSpec& parent, const std::string& child_name) {
  // Block tensors look like "m<i>/b<j>/<sub-layer>/<field>".
  if (child_name.size() < 2 || child_name[0] != 'm' || !std::isdigit(child_name[1])) {
    return child_name;
  }
  const auto slash = child_name.find('/');
  const auto slash2 = child_name.find('/', slash + 1);
  if (slash == std::string::npos || slash2 == std::string::npos ||
      child_name[slash + 1] != 'b') {
    throw InvalidArgument("cannot align layer '" + child_name + "'");
  }
  const int module = std::stoi(child_name.substr(1, slash - 1));
  const int block = std::stoi(child_name.substr(slash + 2, slash2 - slash - 2));
  if (module < 1 || module > static_cast<int>(parent.blocks.size())) {
    throw InvalidArgument("cannot align layer '" + child_name + "': parent has no module " +
                          std::to_string(module));
  }
  const int parent_blocks = static_cast<int>(parent.blocks[module - 1].size());
  const int source = std::min(block, parent_blocks);
  return "m" + std::to_string(module) + "/b" + std::to_string(source) +
         child_name.substr(slash2);
}

TransferReport TransferNetwork(const Network& parent, Network& child) {
  TransferReport report;
  for (const auto& spec : child.parameter_specs()) {
    const std::string source = AlignedParentName(parent.spec(), spec.name);
    if (!parent.HasTensor(source)) {
      throw InvalidArgument("cannot align layer '" + spec.name + "': parent has no '" +
                            source + "'");
    }
    const Tensor& from = parent.tensor(source);
    Tensor& to = child.tensor(spec.name);
    Inheritance inh;
    switch (spec.role) {
      case ParamRole::kConvKernel:
      case ParamRole::kDepthwiseKernel:
      case ParamRole::kTransposeKernel:
        inh = InheritConv(from, to);
        break;
      case ParamRole::kDenseKernel:
      case ParamRole::kBias:
        inh = InheritDense(from, to);
        break;
      case ParamRole::kBnGamma:
      case ParamRole::kBnBeta:
      case ParamRole::kBnMovingMean:
      case ParamRole::kBnMovingVar:
        inh = InheritBnVector(from, to.dim(0));
        break;
    }
    TransferRecord r{spec.name, from.shape(), to.shape(), source, inh.transfer_case,
                     inh.inherited, static_cast<int64_t>(to.size())};
    to = std::move(inh.value);
    report.inherited += r.inherited;
    report.total += r.total;
    report.records.push_back(std::move(r));
  }
  child.ResetOptimizer(child.optimizer().config);
  return report;
}

double PreservationScore(Network& parent, Network& child, const Tensor& probe_batch) {
  const Tensor p = parent.Predict(probe_batch);
  const Tensor c = child.Predict(probe_batch);
  if (p.shape() != c.shape()) {
    throw ShapeError("parent output " + ShapeToString(p.shape()) + " and child output " +
                     ShapeToString(c.shape()) + " differ");
  }
  const int64_t n = p.dim(0);
  if (n == 0) throw InvalidArgument("empty probe batch");
  const int64_t per = p.size() / n;
  double total = 0.0;
  for (int64_t s = 0; s < n; ++s) {
    double diff = 0.0, norm = 0.0;
    for (int64_t k = s * per; k < (s + 1) * per; ++k) {
      const double d = c.raw()[k] - p.raw()[k];
      diff += d * d;
      norm += p.raw()[k] * p.raw()[k];
    }
    if (norm == 0.0) {
      total += diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      total += std::sqrt(diff / norm);
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace evopose
