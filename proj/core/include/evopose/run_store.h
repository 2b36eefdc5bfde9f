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

#ifndef EVOPOSE_RUN_STORE_H_
#define EVOPOSE_RUN_STORE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evopose/config.h"
#include "evopose/evolution.h"

namespace evopose {

inline constexpr int kRunFormatVersion = 1;
inline constexpr char kManifestFile[] = "manifest.json";
inline constexpr char kStopFile[] = "stop";

struct Manifest {
  int version = kRunFormatVersion;
  std::string tool_version;
  std::string config_json;
  std::string config_hash;
  int64_t generation = -1;
  bool completed = false;
  std::map<std::string, std::string> files;  // relative path -> SHA-256
};

bool HasManifest(const std::string& run_dir);
Manifest ReadManifest(const std::string& run_dir);
// Checks the format version and every listed file hash; throws IoError
// naming the first missing or corrupt file.
Manifest VerifyRunDir(const std::string& run_dir);

// Writes gen_####/ for state.latest, the tables, cache.txt and state.json,
// then the manifest. Every file is replaced atomically.
void WriteCheckpoint(const std::string& run_dir, const RunConfig& config,
                     const EvolutionState& state, bool completed);

// Verifies the directory and rebuilds the state. Throws ConfigError when the
// directory was created with a different config.
EvolutionState LoadCheckpoint(const std::string& run_dir, const RunConfig& config);

// generation,index,genotype,parent,params,loss,fitness,diverged
std::string HistoryCsv(const std::vector<FitnessRecord>& history);
std::vector<FitnessRecord> ParseHistoryCsv(const std::string& text);
// generation,rank,genotype,params,loss,fitness
std::string PoolCsv(const std::vector<std::vector<FitnessRecord>>& pool_history);
// generation,index,genotype,seconds
std::string TimingsCsv(const std::vector<FitnessRecord>& history);

std::string FormatDouble(double v);
double ParseDouble(const std::string& s);

std::string WeightsPath(int64_t generation, int64_t index);

}  // namespace evopose

#endif  // EVOPOSE_RUN_STORE_H_
