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

// Command-line entry point: evolve, train, scale, eval, flops, report.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "evopose/arch_spec.h"
#include "evopose/config.h"
#include "evopose/dataset.h"
#include "evopose/error.h"
#include "evopose/evolution.h"
#include "evopose/genotype.h"
#include "evopose/hashing.h"
#include "evopose/network.h"
#include "evopose/report.h"
#include "evopose/run_store.h"
#include "evopose/scaling.h"
#include "evopose/serialization.h"
#include "evopose/trainer.h"
#include "evopose/version.h"

namespace fs = std::filesystem;

namespace evopose {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::atomic<bool> g_stop{false};
std::atomic<bool> g_cancel{false};

extern "C" void OnSigint(int) {
  if (g_stop.load()) g_cancel.store(true);
  g_stop.store(true);
}

void Log(const std::string& line) { std::cerr << line << std::endl; }

// "ancestor", "evopose2d-s", a canonical key, or a file holding the grid.
Genotype ResolveGenotype(const std::string& arg) {
  if (arg == "ancestor") return AncestorGenotype();
  if (arg == "evopose2d-s") return EvoPose2DSGenotype();
  if (fs::is_regular_file(arg)) return ParseGenotype(ReadFileBytes(arg));
  try {
    return ParseGenotype(arg);
  } catch (const InvalidArgument& e) {
    throw UsageError("genotype '" + arg + "' is neither a file nor a valid key: " + e.what());
  }
}

void RemoveRunArtifacts(const std::string& dir) {
  for (const char* f : {kManifestFile, "state.json", "history.csv", "timings.csv", "pool.csv",
                        "cache.txt", "best_fitness.csv", "scatter.svg", kStopFile}) {
    fs::remove(fs::path(dir) / f);
  }
  if (!fs::is_directory(dir)) return;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && e.path().filename().string().rfind("gen_", 0) == 0) {
      fs::remove_all(e.path());
    }
  }
}

int CmdEvolve(const std::string& config_path, bool force, int workers) {
  RunConfig cfg = LoadRunConfig(config_path);
  if (workers > 0) cfg.workers = workers;
  if (cfg.run_dir.empty()) throw ConfigError("'run_dir' must be set to evolve");
  if (HasManifest(cfg.run_dir)) {
    const Manifest m = ReadManifest(cfg.run_dir);
    if (m.completed && !force) {
      throw UsageError(cfg.run_dir + " holds a finished run (generation " +
                       std::to_string(m.generation) + "); pass --force to start over");
    }
    if (force) RemoveRunArtifacts(cfg.run_dir);
  }
  const Dataset data = PrepareDataset(cfg);
  const fs::path stop_file = fs::path(cfg.run_dir) / kStopFile;
  RunOptions options;
  options.workers = cfg.workers;
  options.cancel = &g_cancel;
  options.log = Log;
  options.stop_requested = [&]() {
    if (fs::exists(stop_file)) {
      fs::remove(stop_file);
      Log("stop file found; stopping after the last checkpoint");
      return true;
    }
    if (g_stop.load()) {
      Log("interrupted; stopping after the last checkpoint");
      return true;
    }
    return false;
  };
  const RunSummary s = RunEvolution(cfg, data, options);
  std::printf("generation %lld %s best %s fitness %s loss %s params %lld\n",
              static_cast<long long>(s.generation), s.completed ? "complete" : "stopped",
              s.best.key.c_str(), FormatDouble(s.best.fitness).c_str(),
              FormatDouble(s.best.loss).c_str(), static_cast<long long>(s.best.params));
  return kExitOk;
}

int CmdTrain(const std::string& config_path, const std::string& genotype_arg, bool no_warmup,
             std::string out_dir) {
  const RunConfig cfg = LoadRunConfig(config_path);
  const Genotype g = ResolveGenotype(genotype_arg);
  if (out_dir.empty()) {
    if (cfg.run_dir.empty()) throw UsageError("set run_dir in the config or pass --out");
    out_dir = (fs::path(cfg.run_dir) / "train").string();
  }
  const Dataset data = PrepareDataset(cfg);
  const std::string key = CanonicalEncode(g);
  Network net(BuildArchSpec(g, data.config.height, data.config.width, data.config.keypoints,
                            cfg.model, cfg.Ancestor()),
              DeriveSeed(cfg.seed, key));
  TrainOptions options = cfg.ToTrainOptions(cfg.training.epochs, DeriveSeed(cfg.seed, "train"));
  if (no_warmup) options.warmup_epochs = 0;
  options.cancel = &g_stop;
  const TrainResult r = Train(net, data, options);
  const EvalResult ev = Evaluate(net, data.val, data.norm, cfg.training.eval_batch_size);

  fs::create_directories(out_dir);
  std::string csv = "step,epoch,lr,loss\n";
  for (const auto& s : r.steps) {
    csv += std::to_string(s.step) + "," + std::to_string(s.epoch) + "," + FormatDouble(s.lr) +
           "," + FormatDouble(s.loss) + "\n";
  }
  WriteFileAtomic((fs::path(out_dir) / "loss.csv").string(), csv);
  WriteWeightsFile((fs::path(out_dir) / "weights.evow").string(), net.ExportWeights());
  WriteFileAtomic((fs::path(out_dir) / "arch.txt").string(), net.spec().ToText());
  nlohmann::json m;
  m["tool_version"] = kVersion;
  m["config"] = nlohmann::json::parse(RunConfigToJson(cfg));
  m["config_hash"] = ConfigHash(cfg);
  m["genotype"] = key;
  m["warmup"] = !no_warmup;
  m["peak_lr"] = r.schedule.PeakLr();
  m["steps_per_epoch"] = r.schedule.steps_per_epoch;
  m["total_steps"] = r.schedule.TotalSteps();
  m["val_loss"] = FormatDouble(ev.loss);
  m["val_pck"] = FormatDouble(ev.pck);
  m["params"] = CountParamsFlops(net.spec()).params;
  WriteFileAtomic((fs::path(out_dir) / "manifest.json").string(), m.dump(2) + "\n");
  std::printf("trained %s for %lld steps; peak lr %s; val loss %s; PCK %s\n", key.c_str(),
              static_cast<long long>(r.steps.size()), FormatDouble(r.schedule.PeakLr()).c_str(),
              FormatDouble(ev.loss).c_str(), FormatDouble(ev.pck).c_str());
  return kExitOk;
}

void PrintCost(const ArchSpec& spec) {
  const NetworkCost c = CountParamsFlops(spec);
  std::printf("params %lld\nparams_with_bn_stats %lld\nmacs %lld\nflops %lld\n",
              static_cast<long long>(c.params), static_cast<long long>(c.params_with_bn_stats),
              static_cast<long long>(c.macs), static_cast<long long>(c.flops));
}

int CmdScale(const std::string& genotype_arg, int64_t resolution, int keypoints,
             std::string out) {
  const Genotype g = ResolveGenotype(genotype_arg);
  ScalingCoefficients s;
  try {
    s = ComputeScaling(resolution);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const ArchSpec spec = CompoundScale(g, resolution, keypoints);
  if (out.empty()) out = "scaled_" + std::to_string(resolution) + ".arch.txt";
  WriteFileAtomic(out, spec.ToText());
  std::printf("phi %.4f\nc_d %.4f\nc_w %.4f\ninput %lldx%lld\n", s.phi, s.c_d, s.c_w,
              static_cast<long long>(spec.input_h), static_cast<long long>(spec.input_w));
  PrintCost(spec);
  std::printf("arch %s\n", out.c_str());
  return kExitOk;
}

int CmdFlops(const std::string& genotype_arg, int64_t height, int64_t width, int keypoints,
             const std::string& config_path) {
  BuildOptions options;
  if (!config_path.empty()) options = LoadRunConfig(config_path).model;
  const ArchSpec spec =
      BuildArchSpec(ResolveGenotype(genotype_arg), height, width, keypoints, options);
  std::printf("%s", FormatDecodeTable(spec).c_str());
  PrintCost(spec);
  return kExitOk;
}

int CmdEval(const std::string& config_path, const std::string& genotype_arg,
            const std::string& weights_path) {
  const RunConfig cfg = LoadRunConfig(config_path);
  const Dataset data = PrepareDataset(cfg);
  Network net(BuildArchSpec(ResolveGenotype(genotype_arg), data.config.height,
                            data.config.width, data.config.keypoints, cfg.model,
                            cfg.Ancestor()),
              0);
  net.ImportWeights(ReadWeightsFile(weights_path));
  const EvalResult r = Evaluate(net, data.val, data.norm, cfg.training.eval_batch_size);
  std::printf("val_loss %s\npck %s\n", FormatDouble(r.loss).c_str(), FormatDouble(r.pck).c_str());
  return kExitOk;
}

int CmdReport(const std::string& run_dir) {
  const ReportResult r = WriteReport(run_dir);
  std::printf("%s (%zu generations)\n%s (%zu points)\n", r.best_fitness_csv_path.c_str(),
              r.generations, r.scatter_svg_path.c_str(), r.points);
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Evolutionary search over heatmap keypoint networks"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config, genotype, weights, out, run_dir;
  bool force = false, no_warmup = false;
  int workers = 0, keypoints = 17;
  int64_t resolution = 256, height = 256, width = 192;

  auto* evolve = app.add_subcommand("evolve", "Run or resume an evolutionary search");
  evolve->add_option("--config", config, "Run config (JSON)")->required();
  evolve->add_flag("--force", force, "Start over in a finished run directory");
  evolve->add_option("--workers", workers, "Parallel child trainings (overrides config)")
      ->check(CLI::PositiveNumber);

  auto* train = app.add_subcommand("train", "Train one architecture with the full schedule");
  train->add_option("--config", config, "Run config (JSON)")->required();
  train->add_option("--genotype", genotype, "Genotype key, file, 'ancestor' or 'evopose2d-s'")
      ->required();
  train->add_flag("--no-warmup", no_warmup, "Start at the peak learning rate");
  train->add_option("--out", out, "Output directory (default <run_dir>/train)");

  auto* scale = app.add_subcommand("scale", "Compound-scale a genotype to a larger input");
  scale->add_option("--genotype", genotype, "Genotype key, file, 'ancestor' or 'evopose2d-s'")
      ->required();
  scale->add_option("--resolution", resolution, "Target input height")->required();
  scale->add_option("--keypoints", keypoints, "Output keypoints");
  scale->add_option("--out", out, "ArchSpec output file");

  auto* eval = app.add_subcommand("eval", "Validation loss and PCK of saved weights");
  eval->add_option("--config", config, "Run config (JSON)")->required();
  eval->add_option("--genotype", genotype, "Genotype of the weights")->required();
  eval->add_option("--weights", weights, "EVOW weights file")->required();

  auto* flops = app.add_subcommand("flops", "Print the decode table with params and FLOPs");
  flops->add_option("--genotype", genotype, "Genotype key, file, 'ancestor' or 'evopose2d-s'")
      ->required();
  flops->add_option("--height", height, "Input height");
  flops->add_option("--width", width, "Input width");
  flops->add_option("--keypoints", keypoints, "Output keypoints");
  flops->add_option("--config", config, "Take model options from this run config");

  auto* report = app.add_subcommand("report", "Write best_fitness.csv and scatter.svg");
  report->add_option("--run-dir", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::signal(SIGINT, OnSigint);
  try {
    if (*evolve) return CmdEvolve(config, force, workers);
    if (*train) return CmdTrain(config, genotype, no_warmup, out);
    if (*scale) return CmdScale(genotype, resolution, keypoints, out);
    if (*eval) return CmdEval(config, genotype, weights);
    if (*flops) return CmdFlops(genotype, height, width, keypoints, config);
    if (*report) return CmdReport(run_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace evopose

int main(int argc, char** argv) { return evopose::Main(argc, argv); }
