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

#ifndef EVOPOSE_EVOLUTION_H_
#define EVOPOSE_EVOLUTION_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "evopose/config.h"
#include "evopose/dataset.h"
#include "evopose/genotype.h"
#include "evopose/serialization.h"

namespace evopose {

// (target / params)^gamma * loss.
double Fitness(double loss, int64_t params, int64_t target, double gamma);

struct FitnessRecord {
  int64_t generation = 0;
  int64_t index = 0;  // mint order within the generation
  std::string key;
  std::string parent_key;  // empty for the ancestor
  int64_t params = 0;
  double loss = 0.0;
  double fitness = 0.0;
  bool diverged = false;
  double seconds = 0.0;  // wall time; kept out of history.csv
};

// A trained network: its genotype, record and weights.
struct Candidate {
  Genotype genotype;
  FitnessRecord record;
  std::shared_ptr<const std::vector<NamedTensor>> weights;  // null when diverged
  std::string arch_text;
  std::string transfer_csv;  // empty without weight transfer
};

struct EvolutionState {
  int64_t generation = -1;  // last completed generation
  std::vector<Candidate> pool;  // ranked, best first
  GenotypeCache cache;
  std::mt19937_64 rng;
  std::vector<FitnessRecord> history;  // mint order
  std::vector<Candidate> latest;  // networks trained in `generation`
  // Ranked pool records after each completed generation.
  std::vector<std::vector<FitnessRecord>> pool_history;
};

// Orders by fitness, then fewer params, then genotype key.
bool RanksBefore(const FitnessRecord& a, const FitnessRecord& b);

// Number of children each of `pool_size` ranked parents receives.
std::vector<int> ChildrenPerParent(int lambda, int pool_size);

struct EvolutionContext {
  const RunConfig* config = nullptr;
  const Dataset* data = nullptr;
  int workers = 1;
  const std::atomic<bool>* cancel = nullptr;  // aborts training mid-generation
  std::function<void(const std::string&)> log;
};

// Trains and evaluates one network. A child is weight-transferred from
// `parent` when the config enables it; divergence yields +inf fitness.
Candidate TrainCandidate(const EvolutionContext& ctx, const Genotype& genotype,
                         const Candidate* parent, int64_t generation, int64_t index,
                         int64_t epochs);

EvolutionState RunGenerationZero(const EvolutionContext& ctx);
void RunGeneration(EvolutionState& state, const EvolutionContext& ctx);

struct RunOptions {
  int workers = 1;
  const std::atomic<bool>* cancel = nullptr;
  // Polled between generations; true ends the run after the checkpoint.
  std::function<bool()> stop_requested;
  std::function<void(const std::string&)> log;
};

struct RunSummary {
  bool resumed = false;
  bool completed = false;
  bool noop = false;  // the run directory was already complete
  int64_t generation = -1;
  FitnessRecord best;
};

// Starts a fresh run in config.run_dir or resumes its last checkpoint.
RunSummary RunEvolution(const RunConfig& config, const Dataset& data, const RunOptions& options);

}  // namespace evopose

#endif  // EVOPOSE_EVOLUTION_H_
