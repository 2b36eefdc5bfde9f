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

#ifndef EVOPOSE_CONFIG_H_
#define EVOPOSE_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "evopose/arch_spec.h"
#include "evopose/dataset.h"
#include "evopose/genotype.h"
#include "evopose/optimizer.h"
#include "evopose/trainer.h"

namespace evopose {

struct DatasetSection {
  DatasetConfig generator;  // generator.seed is derived from RunConfig::seed
  std::string path;         // empty: generate in memory
  bool generate = true;     // create the dataset at `path` when missing
};

struct TrainingSection {
  int64_t epochs = 1;  // standalone training only
  int64_t batch_size = 16;
  double base_lr = 2.5e-4;
  int64_t reference_batch = 32;
  int64_t warmup_epochs = 5;
  AdamConfig adam;
  int64_t eval_batch_size = 32;
  bool min_over_epochs = false;
};

struct EvolutionConfig {
  int mu = 1;
  int lambda = 2;
  double gamma = 0.0;  // required in config files
  int64_t target_params = 5'000'000;
  int64_t ancestor_epochs = 30;
  int64_t child_epochs = 5;
  int64_t generations = 1;
  bool weight_transfer = true;
  ChannelMutation channel_mutation = ChannelMutation::kResample;
  int max_mutation_attempts = 10000;
  std::string ancestor;  // canonical key; empty selects the default ancestor
};

struct ReportOptions {
  int svg_width = 640;
  int svg_height = 480;
};

struct RunConfig {
  std::string run_dir;
  uint64_t seed = 0;
  int workers = 1;
  DatasetSection dataset;
  BuildOptions model;
  TrainingSection training;
  EvolutionConfig evolution;
  ReportOptions report;

  Genotype Ancestor() const;
  DatasetConfig ResolvedDataset() const;
  TrainOptions ToTrainOptions(int64_t epochs, uint64_t seed) const;
};

// Parses the JSON schema in docs/config_schema.md. Unknown keys, missing
// required keys and out-of-range values raise ConfigError naming the field.
RunConfig ParseRunConfig(std::string_view json_text);
RunConfig LoadRunConfig(const std::string& path);
void ValidateRunConfig(const RunConfig& config);

// Canonical JSON echo (every field, fixed key order).
std::string RunConfigToJson(const RunConfig& config, int indent = 2);
// SHA-256 of the echo with run_dir and workers removed; these do not affect results.
std::string ConfigHash(const RunConfig& config);

std::string_view ChannelMutationName(ChannelMutation m);

// Loads dataset.path, or generates the dataset (saving it when a path is
// set and dataset.generate is true). A missing dataset that may not be
// generated raises ConfigError.
Dataset PrepareDataset(const RunConfig& config);

}  // namespace evopose

#endif  // EVOPOSE_CONFIG_H_
