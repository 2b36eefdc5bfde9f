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

#include "evopose/evolution.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <thread>

#include "evopose/arch_spec.h"
#include "evopose/error.h"
#include "evopose/hashing.h"
#include "evopose/network.h"
#include "evopose/run_store.h"
#include "evopose/trainer.h"
#include "evopose/weight_transfer.h"

namespace evopose {
namespace {

void Log(const EvolutionContext& ctx, const std::string& line) {
  if (ctx.log) ctx.log(line);
}

ArchSpec SpecFor(const EvolutionContext& ctx, const Genotype& g) {
  const auto& d = ctx.data->config;
  return BuildArchSpec(g, d.height, d.width, d.keypoints, ctx.config->model,
                       ctx.config->Ancestor());
}

void SelectPool(EvolutionState& state, std::vector<Candidate> candidates, int mu) {
  std::vector<Candidate> finite;
  for (auto& c : candidates) {
    if (std::isfinite(c.record.fitness)) finite.push_back(std::move(c));
  }
  std::stable_sort(finite.begin(), finite.end(), [](const Candidate& a, const Candidate& b) {
    return RanksBefore(a.record, b.record);
  });
  if (static_cast<int>(finite.size()) > mu) finite.resize(mu);
  state.pool = std::move(finite);
  std::vector<FitnessRecord> records;
  for (const auto& c : state.pool) records.push_back(c.record);
  state.pool_history.push_back(std::move(records));
}

}  // namespace

double Fitness(double loss, int64_t params, int64_t target, double gamma) {
  if (params < 1) throw InvalidArgument("params must be at least 1");
  if (!(loss >= 0.0)) throw InvalidArgument("loss must be non-negative");
  return std::pow(static_cast<double>(target) / static_cast<double>(params), gamma) * loss;
}

bool RanksBefore(const FitnessRecord& a, const FitnessRecord& b) {
  if (a.fitness != b.fitness) return a.fitness < b.fitness;
  if (a.params != b.params) return a.params < b.params;
  return a.key < b.key;
}

std::vector<int> ChildrenPerParent(int lambda, int pool_size) {
  if (pool_size < 1) throw InvalidArgument("empty parent pool");
  std::vector<int> out(pool_size, lambda / pool_size);
  out[0] += lambda % pool_size;
  return out;
}

Candidate TrainCandidate(const EvolutionContext& ctx, const Genotype& genotype,
                         const Candidate* parent, int64_t generation, int64_t index,
                         int64_t epochs) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig& cfg = *ctx.config;
  Candidate c;
  c.genotype = genotype;
  c.record.generation = generation;
  c.record.index = index;
  c.record.key = CanonicalEncode(genotype);
  c.record.parent_key = parent ? parent->record.key : "";
  const uint64_t seed = DeriveSeed(cfg.seed, c.record.key);
  Network net(SpecFor(ctx, genotype), seed);
  c.arch_text = net.spec().ToText();
  c.record.params = CountParamsFlops(net.spec()).params;
  if (parent != nullptr && cfg.evolution.weight_transfer) {
    if (!parent->weights) throw InvalidArgument("parent " + parent->record.key + " has no weights");
    Network source(SpecFor(ctx, parent->genotype), 0);
    source.ImportWeights(*parent->weights);
    c.transfer_csv = TransferNetwork(source, net).ToCsv();
  }
  TrainOptions options = cfg.ToTrainOptions(epochs, DeriveSeed(seed, "train"));
  options.cancel = ctx.cancel;
  try {
    c.record.loss = Train(net, *ctx.data, options).val_loss;
    c.record.fitness = Fitness(c.record.loss, c.record.params, cfg.evolution.target_params,
                               cfg.evolution.gamma);
    c.weights = std::make_shared<const std::vector<NamedTensor>>(net.ExportWeights());
  } catch (const DivergenceError& e) {
    if (parent == nullptr) throw;
    Log(ctx, "child " + c.record.key + " diverged: " + e.what());
    c.record.diverged = true;
    c.record.loss = std::numeric_limits<double>::infinity();
    c.record.fitness = std::numeric_limits<double>::infinity();
  }
  c.record.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

EvolutionState RunGenerationZero(const EvolutionContext& ctx) {
  const RunConfig& cfg = *ctx.config;
  EvolutionState state;
  state.rng.seed(DeriveSeed(cfg.seed, "mutation"));
  const Genotype ancestor = cfg.Ancestor();
  state.cache.Insert(ancestor);
  Candidate a;
  try {
    a = TrainCandidate(ctx, ancestor, nullptr, 0, 0, cfg.evolution.ancestor_epochs);
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string("ancestor training diverged: ") + e.what() +
                          "; lower training.base_lr or check the dataset normalization");
  }
  state.history.push_back(a.record);
  state.latest = {a};
  state.generation = 0;
  SelectPool(state, {a}, cfg.evolution.mu);
  return state;
}

void RunGeneration(EvolutionState& state, const EvolutionContext& ctx) {
  const RunConfig& cfg = *ctx.config;
  if (state.pool.empty()) throw InvalidArgument("cannot evolve from an empty pool");
  const int64_t generation = state.generation + 1;
  const Genotype ancestor = cfg.Ancestor();
  MutationOptions mopts;
  mopts.channel_mutation = cfg.evolution.channel_mutation;
  mopts.max_attempts = cfg.evolution.max_mutation_attempts;

  struct Task {
    Genotype genotype;
    const Candidate* parent;
  };
  std::vector<Task> tasks;
  const auto counts = ChildrenPerParent(cfg.evolution.lambda, static_cast<int>(state.pool.size()));
  for (size_t p = 0; p < state.pool.size(); ++p) {
    for (int i = 0; i < counts[p]; ++i) {
      tasks.push_back(
          {Mutate(state.pool[p].genotype, ancestor, state.cache, state.rng, mopts), &state.pool[p]});
    }
  }

  std::vector<Candidate> children(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      try {
        children[i] = TrainCandidate(ctx, tasks[i].genotype, tasks[i].parent, generation,
                                     static_cast<int64_t>(i), cfg.evolution.child_epochs);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(ctx.workers, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<Candidate> candidates = state.pool;
  for (const auto& c : children) {
    state.history.push_back(c.record);
    candidates.push_back(c);
  }
  state.latest = std::move(children);
  state.generation = generation;
  SelectPool(state, std::move(candidates), cfg.evolution.mu);
}

RunSummary RunEvolution(const RunConfig& config, const Dataset& data, const RunOptions& options) {
  if (config.run_dir.empty()) throw ConfigError("'run_dir' must be set to evolve");
  if (data.config.keypoints != config.dataset.generator.keypoints) {
    throw ConfigError("dataset has " + std::to_string(data.config.keypoints) +
                      " keypoints but 'dataset.keypoints' is " +
                      std::to_string(config.dataset.generator.keypoints));
  }
  EvolutionContext ctx;
  ctx.config = &config;
  ctx.data = &data;
  ctx.workers = options.workers;
  ctx.cancel = options.cancel;
  ctx.log = options.log;

  RunSummary summary;
  EvolutionState state;
  const int64_t last = config.evolution.generations;
  if (HasManifest(config.run_dir)) {
    state = LoadCheckpoint(config.run_dir, config);
    summary.resumed = true;
    if (state.generation >= last) {
      summary.noop = true;
      summary.completed = true;
      summary.generation = state.generation;
      if (!state.pool.empty()) summary.best = state.pool.front().record;
      Log(ctx, "run already complete at generation " + std::to_string(state.generation));
      return summary;
    }
    Log(ctx, "resuming after generation " + std::to_string(state.generation));
  } else {
    std::filesystem::create_directories(config.run_dir);
    state = RunGenerationZero(ctx);
    WriteCheckpoint(config.run_dir, config, state, state.generation >= last);
    Log(ctx, "generation 0 best fitness " + FormatDouble(state.pool.front().record.fitness));
  }
  while (state.generation < last) {
    if (options.stop_requested && options.stop_requested()) break;
    RunGeneration(state, ctx);
    WriteCheckpoint(config.run_dir, config, state, state.generation >= last);
    Log(ctx, "generation " + std::to_string(state.generation) + " best fitness " +
                 FormatDouble(state.pool.front().record.fitness));
  }
  summary.generation = state.generation;
  summary.completed = state.generation >= last;
  summary.best = state.pool.front().record;
  return summary;
}

}  // namespace evopose
