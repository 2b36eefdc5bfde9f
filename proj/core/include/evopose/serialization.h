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

#ifndef EVOPOSE_SERIALIZATION_H_
#define EVOPOSE_SERIALIZATION_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evopose/tensor.h"

namespace evopose {

// Binary parameter container ("EVOW"). Layout, all integers little-endian:
//   magic "EVOW" | version u32 | entry count u32
//   per entry: name length u32 | UTF-8 name | dtype u8 | rank u32 |
//              dims u64[rank] | data (IEEE-754 binary64, little-endian)
// See docs/weights_format.md.
inline constexpr char kWeightsMagic[4] = {'E', 'V', 'O', 'W'};
inline constexpr uint32_t kWeightsVersion = 1;
inline constexpr uint8_t kDtypeFloat64 = 1;

using NamedTensor = std::pair<std::string, Tensor>;

std::string EncodeWeights(const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> DecodeWeights(std::string_view bytes);

void WriteWeightsFile(const std::string& path, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> ReadWeightsFile(const std::string& path);

// Whole-file helpers shared by the on-disk formats.
std::string ReadFileBytes(const std::string& path);
// Writes to `path`.tmp then renames over `path`.
void WriteFileAtomic(const std::string& path, std::string_view bytes);

}  // namespace evopose

#endif  // EVOPOSE_SERIALIZATION_H_
