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

#ifndef EVOPOSE_WEIGHT_TRANSFER_H_
#define EVOPOSE_WEIGHT_TRANSFER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "evopose/layers.h"
#include "evopose/network.h"
#include "evopose/tensor.h"

namespace evopose {

// Slicing case by comparing child and parent kernel size k and input width i:
//   1: i_c < i_p, k_c < k_p    2: i_c >= i_p, k_c < k_p
//   3: i_c < i_p, k_c >= k_p   4: i_c >= i_p, k_c >= k_p
int TransferCase(int64_t k_parent, int64_t k_child, int64_t i_parent, int64_t i_child);

struct Inheritance {
  Tensor value;
  int transfer_case = 4;
  int64_t inherited = 0;  // scalars copied from the parent
  double fraction() const {
    return value.size() == 0 ? 1.0
                             : static_cast<double>(inherited) /
                                   static_cast<double>(value.size());
  }
};

// Kernel (k, k, i, o). Copies the central window with offset
// p = (k_p - k_c) / 2 and the leading min(i) x min(o) channels into `fresh`,
// a child-shaped tensor already drawn from the initializer. A larger child
// kernel receives the parent kernel at its center.
Inheritance InheritConv(const Tensor& parent, const Tensor& fresh);

// Dense (i, o) matrix or bias vector: leading-index slicing.
Inheritance InheritDense(const Tensor& parent, const Tensor& fresh);

// Copies the leading min(widths) entries; new slots get the mean of `parent`.
Inheritance InheritBnVector(const Tensor& parent, int64_t child_width);
BatchNormParams InheritBn(const BatchNormParams& parent, int64_t child_width);

struct TransferRecord {
  std::string layer;
  Shape parent_shape;
  Shape child_shape;
  std::string source;  // parent tensor name
  int transfer_case = 4;
  int64_t inherited = 0;
  int64_t total = 0;
  double fraction() const {
    return total == 0 ? 1.0 : static_cast<double>(inherited) / static_cast<double>(total);
  }
};

struct TransferReport {
  std::vector<TransferRecord> records;
  int64_t inherited = 0;
  int64_t total = 0;
  double fraction() const {
    return total == 0 ? 1.0 : static_cast<double>(inherited) / static_cast<double>(total);
  }
  const TransferRecord& Find(const std::string& layer) const;
  // layer,parent_shape,child_shape,case,inherited,total,fraction
  std::string ToCsv() const;
};

// Name of the parent tensor aligned with `child_name`: same module and
// sub-layer, with child blocks beyond the parent's count mapped to the
// parent module's last block.
std::string AlignedParentName(const ArchSpec& parent, const std::string& child_name);

// Overwrites the inheritable part of every child tensor. The child must have
// been freshly initialized; its optimizer state is reset.
TransferReport TransferNetwork(const Network& parent, Network& child);

// Mean over the batch of ||C(x) - P(x)|| / ||P(x)||.
double PreservationScore(Network& parent, Network& child, const Tensor& probe_batch);

}  // namespace evopose

#endif  // EVOPOSE_WEIGHT_TRANSFER_H_
