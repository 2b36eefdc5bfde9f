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

#include "evopose/network.h"

#include <cmath>

#include "evopose/error.h"

namespace evopose {
namespace {

bool IsBatchNormRole(ParamRole r) {
  return r == ParamRole::kBnGamma || r == ParamRole::kBnBeta ||
         r == ParamRole::kBnMovingMean || r == ParamRole::kBnMovingVar;
}

Tensor& BatchNormField(BatchNormParams& bn, const std::string& field) {
  if (field == "gamma") return bn.gamma;
  if (field == "beta") return bn.beta;
  if (field == "moving_mean") return bn.moving_mean;
  if (field == "moving_var") return bn.moving_var;
  throw InvalidArgument("unknown batch norm field '" + field + "'");
}

}  // namespace

std::pair<std::string, std::string> SplitParamName(const std::string& name) {
  const auto pos = name.rfind('/');
  if (pos == std::string::npos) return {"", name};
  return {name.substr(0, pos), name.substr(pos + 1)};
}

void InitializeParameter(const ParamSpec& spec, Tensor& t, std::mt19937_64& rng) {
  t = Tensor(spec.shape);
  switch (spec.role) {
    case ParamRole::kConvKernel:
    case ParamRole::kDepthwiseKernel:
    case ParamRole::kTransposeKernel:
    case ParamRole::kDenseKernel: {
      const double stddev = std::sqrt(2.0 / static_cast<double>(spec.fan_in));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& v : t.data()) {
        double z = normal(rng);
        while (std::abs(z) > 2.0) z = normal(rng);
        v = z * stddev;
      }
      break;
    }
    case ParamRole::kBnGamma:
    case ParamRole::kBnMovingVar:
      t.Fill(1.0);
      break;
    case ParamRole::kBias:
    case ParamRole::kBnBeta:
    case ParamRole::kBnMovingMean:
      break;
  }
}

Network::Network(ArchSpec spec, uint64_t seed)
    : spec_(std::move(spec)), param_specs_(spec_.Parameters()) {
  std::mt19937_64 rng(seed);
  for (const auto& p : param_specs_) {
    Tensor t;
    InitializeParameter(p, t, rng);
    if (IsBatchNormRole(p.role)) {
      auto [layer, field] = SplitParamName(p.name);
      auto& bn = batch_norms_[layer];
      bn.momentum = spec_.options.bn_momentum;
      bn.epsilon = spec_.options.bn_epsilon;
      BatchNormField(bn, field) = std::move(t);
    } else {
      tensors_.emplace(p.name, std::move(t));
    }
  }
}

std::map<std::string, Tensor*> Network::Tensors() {
  std::map<std::string, Tensor*> out;
  for (auto& [name, t] : tensors_) out[name] = &t;
  for (auto& [layer, bn] : batch_norms_) {
    out[layer + "/gamma"] = &bn.gamma;
    out[layer + "/beta"] = &bn.beta;
    out[layer + "/moving_mean"] = &bn.moving_mean;
    out[layer + "/moving_var"] = &bn.moving_var;
  }
  return out;
}

std::map<std::string, const Tensor*> Network::Tensors() const {
  std::map<std::string, const Tensor*> out;
  for (auto& [name, t] : const_cast<Network*>(this)->Tensors()) out[name] = t;
  return out;
}

std::map<std::string, Tensor*> Network::TrainableTensors() {
  std::map<std::string, Tensor*> out;
  for (auto& [name, t] : tensors_) out[name] = &t;
  for (auto& [layer, bn] : batch_norms_) {
    out[layer + "/gamma"] = &bn.gamma;
    out[layer + "/beta"] = &bn.beta;
  }
  return out;
}

bool Network::HasTensor(const std::string& name) const {
  if (tensors_.count(name)) return true;
  auto [layer, field] = SplitParamName(name);
  return batch_norms_.count(layer) &&
         (field == "gamma" || field == "beta" || field == "moving_mean" ||
          field == "moving_var");
}

Tensor& Network::tensor(const std::string& name) {
  if (auto it = tensors_.find(name); it != tensors_.end()) return it->second;
  auto [layer, field] = SplitParamName(name);
  auto it = batch_norms_.find(layer);
  if (it == batch_norms_.end()) throw InvalidArgument("no parameter named '" + name + "'");
  return BatchNormField(it->second, field);
}

const Tensor& Network::tensor(const std::string& name) const {
  return const_cast<Network*>(this)->tensor(name);
}

BatchNormParams& Network::batch_norm(const std::string& layer) {
  auto it = batch_norms_.find(layer);
  if (it == batch_norms_.end()) throw InvalidArgument("no batch norm layer '" + layer + "'");
  return it->second;
}

const BatchNormParams& Network::batch_norm(const std::string& layer) const {
  return const_cast<Network*>(this)->batch_norm(layer);
}

Graph::Id Network::Forward(Graph& g, Graph::Id x, bool training) {
  const Tensor& in = g.value(x);
  if (in.rank() != 4 || in.dim(1) != spec_.input_h || in.dim(2) != spec_.input_w ||
      in.dim(3) != 3) {
    throw ShapeError("network expects (N, " + std::to_string(spec_.input_h) + ", " +
                     std::to_string(spec_.input_w) + ", 3) input, got " +
                     ShapeToString(in.shape()));
  }
  auto param = [&](const std::string& name) { return g.Parameter(&tensors_.at(name)); };
  auto conv = [&](Graph::Id h, const std::string& name, int stride, ConvKind kind) {
    return g.Conv(h, param(name + "/kernel"), stride, kind);
  };
  auto bn = [&](Graph::Id h, const std::string& layer) {
    BatchNormParams& p = batch_norms_.at(layer);
    return g.BatchNorm(h, g.Parameter(&p.gamma), g.Parameter(&p.beta), &p, training);
  };
  auto dense = [&](Graph::Id h, const std::string& name) {
    return g.Dense(h, param(name + "/kernel"), param(name + "/bias"));
  };

  Graph::Id h = g.Swish(bn(conv(x, "stem/conv", spec_.stem.stride, ConvKind::kStandard),
                           "stem/bn"));
  for (const auto& module : spec_.blocks) {
    for (const auto& b : module) {
      const std::string p = b.Prefix();
      const Graph::Id block_in = h;
      if (b.has_expand) {
        h = g.Swish(bn(conv(h, p + "/expand", 1, ConvKind::kStandard), p + "/expand_bn"));
      }
      h = g.Swish(bn(conv(h, p + "/dw", b.stride, ConvKind::kDepthwise), p + "/dw_bn"));
      Graph::Id s = g.GlobalAvgPool(h);
      s = g.Swish(dense(s, p + "/se_reduce"));
      s = g.Sigmoid(dense(s, p + "/se_expand"));
      h = g.ChannelScale(h, s);
      h = bn(conv(h, p + "/project", 1, ConvKind::kStandard), p + "/project_bn");
      if (b.skip) h = g.Add(h, block_in);
    }
  }
  for (const auto& l : spec_.head) {
    h = g.Swish(bn(conv(h, l.name + "/conv", l.stride, ConvKind::kTranspose), l.name + "/bn"));
  }
  h = g.Conv(h, param("final/kernel"), 1, ConvKind::kStandard);
  return g.BiasAdd(h, param("final/bias"));
}

Tensor Network::Predict(const Tensor& images) {
  Graph g;
  const Graph::Id out = Forward(g, g.Constant(images), false);
  return g.value(out);
}

void Network::ZeroGrads() {
  for (auto& [name, t] : Tensors()) t->ClearGrad();
}

std::vector<NamedTensor> Network::ExportWeights() const {
  std::vector<NamedTensor> out;
  for (const auto& [name, t] : Tensors()) out.emplace_back(name, *t);
  return out;
}

void Network::ImportWeights(const std::vector<NamedTensor>& weights) {
  auto mine = Tensors();
  if (weights.size() != mine.size()) {
    throw InvalidArgument("weight count " + std::to_string(weights.size()) +
                          " does not match network (" + std::to_string(mine.size()) + ")");
  }
  for (const auto& [name, t] : weights) {
    auto it = mine.find(name);
    if (it == mine.end()) throw InvalidArgument("unexpected weight '" + name + "'");
    if (it->second->shape() != t.shape()) {
      throw ShapeError("weight '" + name + "' has shape " + ShapeToString(t.shape()) +
                       ", network expects " + ShapeToString(it->second->shape()));
    }
  }
  for (const auto& [name, t] : weights) *mine.at(name) = t;
}

void Network::ResetOptimizer(const AdamConfig& config) {
  optimizer_ = AdamState{};
  optimizer_.config = config;
}

}  // namespace evopose
