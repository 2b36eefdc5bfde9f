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

#ifndef EVOPOSE_HASHING_H_
#define EVOPOSE_HASHING_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace evopose {

// Lower-case hex SHA-256 digest.
std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::string& path);

// First eight digest bytes of SHA-256, little-endian. Stable across platforms.
uint64_t StableHash64(std::string_view bytes);

// Seed for a network derived from the run seed and its genotype key.
uint64_t DeriveSeed(uint64_t master_seed, std::string_view key);

}  // namespace evopose

#endif  // EVOPOSE_HASHING_H_
