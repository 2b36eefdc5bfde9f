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

#include "evopose/genotype.h"

#include <cctype>
#include <sstream>

#include "evopose/error.h"
#include "evopose/serialization.h"

namespace evopose {

int Genotype::StrideSum() const {
  int s = 0;
  for (const auto& row : grid) s += row[kStride] - 1;
  return s;
}

Genotype Genotype::FromColumns(const std::array<int, kNumModules>& blocks,
                               const std::array<int, kNumModules>& kernels,
                               const std::array<int, kNumModules>& channels8,
                               const std::array<int, kNumModules>& strides) {
  Genotype g;
  for (int i = 0; i < kNumModules; ++i) {
    g.grid[i] = {blocks[i], kernels[i], channels8[i], strides[i]};
  }
  return g;
}

const Genotype& AncestorGenotype() {
  static const Genotype g = Genotype::FromColumns(
      {1, 2, 2, 3, 3, 4, 1}, {3, 3, 5, 3, 5, 5, 3}, {2, 3, 5, 10, 14, 24, 40},
      {1, 2, 2, 2, 1, 2, 1});
  return g;
}

const Genotype& EvoPose2DSGenotype() {
  static const Genotype g = Genotype::FromColumns(
      {1, 3, 2, 4, 2, 4, 2}, {3, 3, 5, 3, 5, 5, 3}, {2, 3, 5, 10, 14, 16, 10},
      {1, 2, 2, 2, 1, 1, 1});
  return g;
}

std::vector<Violation> Validate(const Genotype& g, const Genotype& ancestor) {
  std::vector<Violation> out;
  for (int i = 0; i < kNumModules; ++i) {
    const auto& r = g.grid[i];
    if (r[kBlocks] < 1 || r[kBlocks] > kMaxBlocks) {
      out.push_back({i, kBlocks, "blocks " + std::to_string(r[kBlocks]) + " outside [1, 4]"});
    }
    if (r[kKernel] != 3 && r[kKernel] != 5) {
      out.push_back({i, kKernel, "kernel " + std::to_string(r[kKernel]) + " not in {3, 5}"});
    }
    const int bound = ancestor.grid[i][kChannels];
    if (r[kChannels] < 1 || r[kChannels] > bound) {
      out.push_back({i, kChannels,
                     "channels/8 " + std::to_string(r[kChannels]) + " outside [1, " +
                         std::to_string(bound) + "]"});
    }
    if (r[kStride] != 1 && r[kStride] != 2) {
      out.push_back({i, kStride, "stride " + std::to_string(r[kStride]) + " not in {1, 2}"});
    } else if (i < kFirstStrideMutableRow && r[kStride] != ancestor.grid[i][kStride]) {
      out.push_back({i, kStride, "stride of module " + std::to_string(i + 1) +
                                     " is fixed to " +
                                     std::to_string(ancestor.grid[i][kStride])});
    }
  }
  if (g.StrideSum() > kStrideBudget) {
    out.push_back({-1, kStride, "sum(stride - 1) = " + std::to_string(g.StrideSum()) +
                                    " exceeds " + std::to_string(kStrideBudget)});
  }
  return out;
}

bool IsValid(const Genotype& g, const Genotype& ancestor) {
  return Validate(g, ancestor).empty();
}

std::string CanonicalEncode(const Genotype& g) {
  std::string s;
  for (int i = 0; i < kNumModules; ++i) {
    if (i) s += ';';
    for (int j = 0; j < kGenesPerModule; ++j) {
      if (j) s += ',';
      s += std::to_string(g.grid[i][j]);
    }
  }
  return s;
}

Genotype ParseGenotype(std::string_view text) {
  std::vector<int> values;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw InvalidArgument("bad genotype token '" + token + "'");
    values.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
      token.push_back(c);
    } else if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      throw InvalidArgument(std::string("unexpected character '") + c + "' in genotype");
    }
  }
  flush();
  if (values.size() != kNumModules * kGenesPerModule) {
    throw InvalidArgument("genotype needs 28 integers, got " + std::to_string(values.size()));
  }
  Genotype g;
  for (int i = 0; i < kNumModules; ++i) {
    for (int j = 0; j < kGenesPerModule; ++j) g.grid[i][j] = values[i * kGenesPerModule + j];
  }
  return g;
}

GenotypeCache::GenotypeCache(const GenotypeCache& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  keys_ = other.keys_;
}

GenotypeCache& GenotypeCache::operator=(const GenotypeCache& other) {
  if (this == &other) return *this;
  std::set<std::string> copy;
  {
    std::lock_guard<std::mutex> lock(other.mu_);
    copy = other.keys_;
  }
  std::lock_guard<std::mutex> lock(mu_);
  keys_ = std::move(copy);
  return *this;
}

bool GenotypeCache::Insert(const Genotype& g) {
  std::lock_guard<std::mutex> lock(mu_);
  return keys_.insert(CanonicalEncode(g)).second;
}

bool GenotypeCache::Contains(const Genotype& g) const { return ContainsKey(CanonicalEncode(g)); }

bool GenotypeCache::ContainsKey(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  return keys_.count(key) > 0;
}

size_t GenotypeCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return keys_.size();
}

std::vector<std::string> GenotypeCache::Keys() const {
  std::lock_guard<std::mutex> lock(mu_);
  return {keys_.begin(), keys_.end()};
}

std::string GenotypeCache::Serialize() const {
  std::string out;
  for (const auto& k : Keys()) out += k + "\n";
  return out;
}

GenotypeCache GenotypeCache::Deserialize(std::string_view text) {
  GenotypeCache cache;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      cache.Insert(ParseGenotype(line));
    } catch (const InvalidArgument& e) {
      throw IoError("cache line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cache;
}

void GenotypeCache::Save(const std::string& path) const { WriteFileAtomic(path, Serialize()); }

GenotypeCache GenotypeCache::Load(const std::string& path) {
  return Deserialize(ReadFileBytes(path));
}

RandInt MakeRandInt(std::mt19937_64& rng) {
  return [&rng](int n) {
    std::uniform_int_distribution<int> dist(0, n - 1);
    return dist(rng);
  };
}

Genotype ApplyMutationDraw(const Genotype& parent, const Genotype& ancestor, int i, int j,
                           const RandInt& randint, ChannelMutation channel_mutation) {
  Genotype child = parent;
  int& cell = child.grid[i][j];
  switch (j) {
    case kBlocks:
      if (cell == 1) {
        cell += 1;
      } else if (cell == kMaxBlocks) {
        cell -= 1;
      } else if (randint(2) > 0) {
        cell += 1;
      } else {
        cell -= 1;
      }
      break;
    case kKernel: {
      static constexpr int kKernels[2] = {3, 5};
      cell = kKernels[randint(2)];
      break;
    }
    case kChannels:
      if (channel_mutation == ChannelMutation::kResample) {
        cell = randint(ancestor.grid[i][j]) + 1;
      } else {
        const int up = randint(2) > 0 ? 1 : -1;
        const int next = cell + up;
        if (next >= 1 && next <= ancestor.grid[i][j]) cell = next;
      }
      break;
    case kStride:
      if (i >= kFirstStrideMutableRow) {
        const int budget_used = parent.StrideSum();
        if (cell == 2 && budget_used == kStrideBudget) {
          cell -= 1;
        } else if (cell == 1 && budget_used < kStrideBudget) {
          cell += 1;
        }
      }
      break;
    default:
      throw InvalidArgument("gene column out of range");
  }
  return child;
}

Genotype Mutate(const Genotype& parent, const Genotype& ancestor, GenotypeCache& cache,
                const RandInt& randint, const MutationOptions& options) {
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    const int i = randint(kNumModules);
    const int j = randint(kGenesPerModule);
    Genotype child = ApplyMutationDraw(parent, ancestor, i, j, randint,
                                       options.channel_mutation);
    if (child == parent) continue;
    if (cache.Insert(child)) return child;
  }
  throw InvalidArgument("no unseen mutation of " + CanonicalEncode(parent) + " after " +
                        std::to_string(options.max_attempts) + " attempts");
}

Genotype Mutate(const Genotype& parent, const Genotype& ancestor, GenotypeCache& cache,
                std::mt19937_64& rng, const MutationOptions& options) {
  return Mutate(parent, ancestor, cache, MakeRandInt(rng), options);
}

}  // namespace evopose
