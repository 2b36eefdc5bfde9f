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

#ifndef EVOPOSE_GENOTYPE_H_
#define EVOPOSE_GENOTYPE_H_

#include <array>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace evopose {

inline constexpr int kNumModules = 7;
inline constexpr int kGenesPerModule = 4;
inline constexpr int kMaxBlocks = 4;
inline constexpr int kStrideBudget = 4;
// Rows at or above this index may mutate their stride.
inline constexpr int kFirstStrideMutableRow = 4;

enum Gene : int { kBlocks = 0, kKernel = 1, kChannels = 2, kStride = 3 };

// 7x4 architecture encoding. Row i describes backbone module i:
// (number of blocks, kernel size, output channels / 8, stride).
struct Genotype {
  std::array<std::array<int, kGenesPerModule>, kNumModules> grid{};

  int blocks(int row) const { return grid[row][kBlocks]; }
  int kernel(int row) const { return grid[row][kKernel]; }
  int channels8(int row) const { return grid[row][kChannels]; }
  int stride(int row) const { return grid[row][kStride]; }
  // Sum over rows of (stride - 1).
  int StrideSum() const;

  static Genotype FromColumns(const std::array<int, kNumModules>& blocks,
                              const std::array<int, kNumModules>& kernels,
                              const std::array<int, kNumModules>& channels8,
                              const std::array<int, kNumModules>& strides);

  auto operator<=>(const Genotype&) const = default;
};

// The hand-designed common ancestor of every search.
const Genotype& AncestorGenotype();
// The best-fitness network reported for the 256x192 search.
const Genotype& EvoPose2DSGenotype();

struct Violation {
  int row;  // -1 for whole-genotype constraints
  int col;
  std::string message;
};

// Every violated constraint, checked against the per-module channel bounds and
// fixed strides of `ancestor`. Empty means valid.
std::vector<Violation> Validate(const Genotype& g,
                                const Genotype& ancestor = AncestorGenotype());
bool IsValid(const Genotype& g, const Genotype& ancestor = AncestorGenotype());

// "b,k,c,s;b,k,c,s;..." with seven rows.
std::string CanonicalEncode(const Genotype& g);
// Accepts the canonical key, or whitespace/newline separated rows.
Genotype ParseGenotype(std::string_view text);

// Set of genotype keys already sampled. Mutations are serialized through an
// internal mutex; lookups may run concurrently with each other.
class GenotypeCache {
 public:
  GenotypeCache() = default;
  GenotypeCache(const GenotypeCache& other);
  GenotypeCache& operator=(const GenotypeCache& other);

  // Returns true if the key was new.
  bool Insert(const Genotype& g);
  bool Contains(const Genotype& g) const;
  bool ContainsKey(const std::string& key) const;
  size_t size() const;
  std::vector<std::string> Keys() const;

  // Newline-delimited canonical keys, sorted.
  std::string Serialize() const;
  static GenotypeCache Deserialize(std::string_view text);
  void Save(const std::string& path) const;
  static GenotypeCache Load(const std::string& path);

 private:
  mutable std::mutex mu_;
  std::set<std::string> keys_;
};

enum class ChannelMutation { kResample, kStep8 };

struct MutationOptions {
  ChannelMutation channel_mutation = ChannelMutation::kResample;
  int max_attempts = 10000;
};

// randint(n) returns a uniform integer in [0, n).
using RandInt = std::function<int(int)>;

RandInt MakeRandInt(std::mt19937_64& rng);

// One draw of the mutation loop body at cell (row, col), applied to a copy of
// `parent`. May return `parent` unchanged (a rejected no-op draw).
Genotype ApplyMutationDraw(const Genotype& parent, const Genotype& ancestor,
                           int row, int col, const RandInt& randint,
                           ChannelMutation channel_mutation = ChannelMutation::kResample);

// Draws (row, col) uniformly and applies ApplyMutationDraw until the child
// differs from the parent and is absent from the cache, then inserts the
// child. Throws InvalidArgument after options.max_attempts rejected draws.
Genotype Mutate(const Genotype& parent, const Genotype& ancestor, GenotypeCache& cache,
                const RandInt& randint, const MutationOptions& options = {});
Genotype Mutate(const Genotype& parent, const Genotype& ancestor, GenotypeCache& cache,
                std::mt19937_64& rng, const MutationOptions& options = {});

}  // namespace evopose

#endif  // EVOPOSE_GENOTYPE_H_
