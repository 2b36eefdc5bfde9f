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

#include "evopose/config.h"

#include <set>

#include <nlohmann/json.hpp>

#include "evopose/error.h"
#include "evopose/hashing.h"
#include "evopose/serialization.h"

namespace evopose {
namespace {

using nlohmann::json;

// Reads typed fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Where() + " must be an object");
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Read(key, out);
  }

  template <typename T>
  void Require(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required key '" + Field(key) + "'");
    Read(key, out);
  }

  Section Child(const std::string& key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : kEmpty, Field(key));
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + Field(key) + "'");
    }
  }

  std::string Field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::string Where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  template <typename T>
  void Read(const std::string& key, T& out) {
    const json& v = j_.at(key);
    bool ok;
    if constexpr (std::is_same_v<T, bool>) {
      ok = v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
      ok = v.is_number_integer() && (std::is_signed_v<T> || v.get<int64_t>() >= 0);
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = v.is_number();
    } else {
      ok = v.is_string();
    }
    if (!ok) throw ConfigError("'" + Field(key) + "' has the wrong type: " + v.dump());
    out = v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void Check(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError("'" + field + "' " + message);
}

ChannelMutation ParseChannelMutation(const std::string& s) {
  if (s == "resample") return ChannelMutation::kResample;
  if (s == "step8") return ChannelMutation::kStep8;
  throw ConfigError("'evolution.channel_mutation' must be \"resample\" or \"step8\", got \"" +
                    s + "\"");
}

json ToJson(const RunConfig& c) {
  const auto& g = c.dataset.generator;
  const auto& t = c.training;
  const auto& e = c.evolution;
  const auto& m = c.model;
  json j = json::object();
  j["run_dir"] = c.run_dir;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["dataset"] = {{"path", c.dataset.path},
                  {"generate", c.dataset.generate},
                  {"train_samples", g.train_samples},
                  {"val_samples", g.val_samples},
                  {"height", g.height},
                  {"width", g.width},
                  {"keypoints", g.keypoints},
                  {"flip", g.flip},
                  {"occlusion_prob", g.occlusion_prob}};
  j["model"] = {{"channel_unit", m.channel_unit},   {"stem_channels", m.stem_channels},
                {"head_channels", m.head_channels}, {"head_layers", m.head_layers},
                {"head_kernel", m.head_kernel},     {"expand_ratio", m.expand_ratio},
                {"se_ratio", m.se_ratio},           {"bn_momentum", m.bn_momentum},
                {"bn_epsilon", m.bn_epsilon}};
  j["training"] = {{"epochs", t.epochs},
                   {"batch_size", t.batch_size},
                   {"base_lr", t.base_lr},
                   {"reference_batch", t.reference_batch},
                   {"warmup_epochs", t.warmup_epochs},
                   {"beta1", t.adam.beta1},
                   {"beta2", t.adam.beta2},
                   {"adam_epsilon", t.adam.epsilon},
                   {"weight_decay", t.adam.weight_decay},
                   {"eval_batch_size", t.eval_batch_size},
                   {"min_over_epochs", t.min_over_epochs}};
  j["evolution"] = {{"mu", e.mu},
                    {"lambda", e.lambda},
                    {"gamma", e.gamma},
                    {"target_params", e.target_params},
                    {"ancestor_epochs", e.ancestor_epochs},
                    {"child_epochs", e.child_epochs},
                    {"generations", e.generations},
                    {"weight_transfer", e.weight_transfer},
                    {"channel_mutation", std::string(ChannelMutationName(e.channel_mutation))},
                    {"max_mutation_attempts", e.max_mutation_attempts},
                    {"ancestor", e.ancestor}};
  j["report"] = {{"svg_width", c.report.svg_width}, {"svg_height", c.report.svg_height}};
  return j;
}

}  // namespace

std::string_view ChannelMutationName(ChannelMutation m) {
  return m == ChannelMutation::kStep8 ? "step8" : "resample";
}

Genotype RunConfig::Ancestor() const {
  return evolution.ancestor.empty() ? AncestorGenotype() : ParseGenotype(evolution.ancestor);
}

DatasetConfig RunConfig::ResolvedDataset() const {
  DatasetConfig d = dataset.generator;
  d.seed = DeriveSeed(seed, "dataset");
  return d;
}

TrainOptions RunConfig::ToTrainOptions(int64_t epochs, uint64_t train_seed) const {
  TrainOptions o;
  o.epochs = epochs;
  o.batch_size = training.batch_size;
  o.base_lr = training.base_lr;
  o.reference_batch = training.reference_batch;
  o.warmup_epochs = training.warmup_epochs;
  o.adam = training.adam;
  o.flip = dataset.generator.flip;
  o.seed = train_seed;
  o.eval_batch_size = training.eval_batch_size;
  o.min_over_epochs = training.min_over_epochs;
  return o;
}

RunConfig ParseRunConfig(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    Section top(root, "");
    top.Get("run_dir", c.run_dir);
    top.Require("seed", c.seed);
    top.Get("workers", c.workers);

    Section d = top.Child("dataset");
    auto& g = c.dataset.generator;
    d.Get("path", c.dataset.path);
    d.Get("generate", c.dataset.generate);
    d.Get("train_samples", g.train_samples);
    d.Get("val_samples", g.val_samples);
    d.Get("height", g.height);
    d.Get("width", g.width);
    d.Get("keypoints", g.keypoints);
    d.Get("flip", g.flip);
    d.Get("occlusion_prob", g.occlusion_prob);
    d.Finish();

    Section m = top.Child("model");
    m.Get("channel_unit", c.model.channel_unit);
    m.Get("stem_channels", c.model.stem_channels);
    m.Get("head_channels", c.model.head_channels);
    m.Get("head_layers", c.model.head_layers);
    m.Get("head_kernel", c.model.head_kernel);
    m.Get("expand_ratio", c.model.expand_ratio);
    m.Get("se_ratio", c.model.se_ratio);
    m.Get("bn_momentum", c.model.bn_momentum);
    m.Get("bn_epsilon", c.model.bn_epsilon);
    m.Finish();

    Section t = top.Child("training");
    auto& tr = c.training;
    t.Get("epochs", tr.epochs);
    t.Get("batch_size", tr.batch_size);
    t.Get("base_lr", tr.base_lr);
    t.Get("reference_batch", tr.reference_batch);
    t.Get("warmup_epochs", tr.warmup_epochs);
    t.Get("beta1", tr.adam.beta1);
    t.Get("beta2", tr.adam.beta2);
    t.Get("adam_epsilon", tr.adam.epsilon);
    t.Get("weight_decay", tr.adam.weight_decay);
    t.Get("eval_batch_size", tr.eval_batch_size);
    t.Get("min_over_epochs", tr.min_over_epochs);
    t.Finish();

    Section e = top.Child("evolution");
    auto& ev = c.evolution;
    e.Get("mu", ev.mu);
    e.Get("lambda", ev.lambda);
    e.Require("gamma", ev.gamma);
    e.Get("target_params", ev.target_params);
    e.Get("ancestor_epochs", ev.ancestor_epochs);
    e.Get("child_epochs", ev.child_epochs);
    e.Get("generations", ev.generations);
    e.Get("weight_transfer", ev.weight_transfer);
    std::string mutation = "resample";
    e.Get("channel_mutation", mutation);
    ev.channel_mutation = ParseChannelMutation(mutation);
    e.Get("max_mutation_attempts", ev.max_mutation_attempts);
    e.Get("ancestor", ev.ancestor);
    e.Finish();

    Section r = top.Child("report");
    r.Get("svg_width", c.report.svg_width);
    r.Get("svg_height", c.report.svg_height);
    r.Finish();
    top.Finish();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ValidateRunConfig(c);
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::string text;
  try {
    text = ReadFileBytes(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  try {
    return ParseRunConfig(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void ValidateRunConfig(const RunConfig& c) {
  Check(c.workers >= 1, "workers", "must be at least 1");
  const auto& g = c.dataset.generator;
  Check(g.train_samples >= 1, "dataset.train_samples", "must be at least 1");
  Check(g.val_samples >= 1, "dataset.val_samples", "must be at least 1");
  Check(g.height >= 8, "dataset.height", "must be at least 8");
  Check(g.width >= 8, "dataset.width", "must be at least 8");
  Check(g.keypoints >= 1, "dataset.keypoints", "must be at least 1");
  Check(g.occlusion_prob >= 0 && g.occlusion_prob <= 1, "dataset.occlusion_prob",
        "must be in [0, 1]");
  Check(!c.dataset.path.empty() || c.dataset.generate, "dataset.generate",
        "must be true when dataset.path is empty");
  const auto& m = c.model;
  Check(m.channel_unit >= 1, "model.channel_unit", "must be at least 1");
  Check(m.stem_channels >= 1, "model.stem_channels", "must be at least 1");
  Check(m.head_channels >= 1, "model.head_channels", "must be at least 1");
  Check(m.head_layers >= 0, "model.head_layers", "must be non-negative");
  Check(m.head_kernel >= 1, "model.head_kernel", "must be at least 1");
  Check(m.expand_ratio >= 1, "model.expand_ratio", "must be at least 1");
  Check(m.se_ratio > 0, "model.se_ratio", "must be positive");
  Check(m.bn_momentum > 0 && m.bn_momentum < 1, "model.bn_momentum", "must be in (0, 1)");
  Check(m.bn_epsilon > 0, "model.bn_epsilon", "must be positive");
  const auto& t = c.training;
  Check(t.epochs >= 0, "training.epochs", "must be non-negative");
  Check(t.batch_size >= 1, "training.batch_size", "must be at least 1");
  Check(t.base_lr > 0, "training.base_lr", "must be positive");
  Check(t.reference_batch >= 1, "training.reference_batch", "must be at least 1");
  Check(t.warmup_epochs >= 0, "training.warmup_epochs", "must be non-negative");
  Check(t.adam.beta1 >= 0 && t.adam.beta1 < 1, "training.beta1", "must be in [0, 1)");
  Check(t.adam.beta2 >= 0 && t.adam.beta2 < 1, "training.beta2", "must be in [0, 1)");
  Check(t.adam.epsilon > 0, "training.adam_epsilon", "must be positive");
  Check(t.adam.weight_decay >= 0, "training.weight_decay", "must be non-negative");
  Check(t.eval_batch_size >= 1, "training.eval_batch_size", "must be at least 1");
  const auto& e = c.evolution;
  Check(e.mu >= 1, "evolution.mu", "must be at least 1");
  Check(e.lambda >= e.mu, "evolution.lambda", "must be at least evolution.mu");
  Check(e.gamma >= 0, "evolution.gamma", "must be non-negative");
  Check(e.target_params >= 1, "evolution.target_params", "must be at least 1");
  Check(e.ancestor_epochs >= 0, "evolution.ancestor_epochs", "must be non-negative");
  Check(e.child_epochs >= 0, "evolution.child_epochs", "must be non-negative");
  Check(e.child_epochs <= e.ancestor_epochs, "evolution.child_epochs",
        "must not exceed evolution.ancestor_epochs");
  Check(e.generations >= 0, "evolution.generations", "must be non-negative");
  Check(e.max_mutation_attempts >= 1, "evolution.max_mutation_attempts", "must be at least 1");
  if (!e.ancestor.empty()) {
    try {
      const Genotype a = ParseGenotype(e.ancestor);
      Check(IsValid(a, a), "evolution.ancestor", "is not a valid genotype");
    } catch (const InvalidArgument& err) {
      throw ConfigError(std::string("'evolution.ancestor' ") + err.what());
    }
  }
  Check(c.report.svg_width >= 64, "report.svg_width", "must be at least 64");
  Check(c.report.svg_height >= 64, "report.svg_height", "must be at least 64");
}

std::string RunConfigToJson(const RunConfig& c, int indent) { return ToJson(c).dump(indent); }

std::string ConfigHash(const RunConfig& c) {
  json j = ToJson(c);
  j.erase("run_dir");
  j.erase("workers");
  return Sha256Hex(j.dump());
}

Dataset PrepareDataset(const RunConfig& c) {
  const DatasetConfig want = c.ResolvedDataset();
  if (c.dataset.path.empty()) return GenerateDataset(want);
  if (DatasetExists(c.dataset.path)) {
    Dataset d = LoadDataset(c.dataset.path);
    if (d.config.height != want.height || d.config.width != want.width ||
        d.config.keypoints != want.keypoints) {
      throw ConfigError("dataset at " + c.dataset.path + " is " + std::to_string(d.config.height) +
                        "x" + std::to_string(d.config.width) + " with " +
                        std::to_string(d.config.keypoints) +
                        " keypoints, which does not match the 'dataset' section");
    }
    return d;
  }
  if (!c.dataset.generate) {
    throw ConfigError("no dataset at '" + c.dataset.path +
                      "' and 'dataset.generate' is false");
  }
  Dataset d = GenerateDataset(want);
  SaveDataset(c.dataset.path, d);
  return d;
}

}  // namespace evopose
