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

#ifndef EVOPOSE_REPORT_H_
#define EVOPOSE_REPORT_H_

#include <string>
#include <vector>

#include "evopose/evolution.h"

namespace evopose {

struct BestFitnessPoint {
  int64_t generation = 0;
  double fitness = 0.0;
};

// Rank-0 pool fitness per generation, read from pool.csv text.
std::vector<BestFitnessPoint> BestFitnessCurve(const std::string& pool_csv);

// One circle per history row at (params, loss), log-scaled x axis. Diverged
// rows are drawn as crosses on the top edge.
std::string ScatterSvg(const std::vector<FitnessRecord>& history, int width, int height);

struct ReportResult {
  std::string best_fitness_csv_path;
  std::string scatter_svg_path;
  size_t points = 0;
  size_t generations = 0;
};

// Verifies the manifest (file hashes and config hash) and writes
// best_fitness.csv and scatter.svg into `run_dir`.
ReportResult WriteReport(const std::string& run_dir);

}  // namespace evopose

#endif  // EVOPOSE_REPORT_H_
