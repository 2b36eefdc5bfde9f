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

#ifndef EVOPOSE_NETWORK_H_
#define EVOPOSE_NETWORK_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "evopose/arch_spec.h"
#include "evopose/graph.h"
#include "evopose/layers.h"
#include "evopose/optimizer.h"
#include "evopose/serialization.h"
#include "evopose/tensor.h"

namespace evopose {

// Fresh-parameter initializer shared by network construction and weight
// transfer: fan-in scaled normal truncated at two standard deviations for
// kernels, zeros for biases, identity statistics for batch norm.
void InitializeParameter(const ParamSpec& spec, Tensor& tensor, std::mt19937_64& rng);

// An ArchSpec bound to its parameters and optimizer state.
class Network {
 public:
  Network(ArchSpec spec, uint64_t seed);

  const ArchSpec& spec() const { return spec_; }

  // Every tensor by name: conv/dense kernels and biases plus the four batch
  // norm vectors ("<layer>/gamma", "/beta", "/moving_mean", "/moving_var").
  std::map<std::string, Tensor*> Tensors();
  std::map<std::string, const Tensor*> Tensors() const;
  std::map<std::string, Tensor*> TrainableTensors();
  Tensor& tensor(const std::string& name);
  const Tensor& tensor(const std::string& name) const;
  bool HasTensor(const std::string& name) const;
  BatchNormParams& batch_norm(const std::string& layer);
  const BatchNormParams& batch_norm(const std::string& layer) const;
  const std::vector<ParamSpec>& parameter_specs() const { return param_specs_; }

  // Builds the forward pass onto `graph`; returns the heatmap node (N, h', w', K).
  Graph::Id Forward(Graph& graph, Graph::Id images, bool training);
  // Inference-mode forward on an NHWC batch.
  Tensor Predict(const Tensor& images);

  void ZeroGrads();

  std::vector<NamedTensor> ExportWeights() const;
  // Names and shapes must match this network exactly.
  void ImportWeights(const std::vector<NamedTensor>& weights);

  AdamState& optimizer() { return optimizer_; }
  const AdamState& optimizer() const { return optimizer_; }
  void ResetOptimizer(const AdamConfig& config);

 private:
  ArchSpec spec_;
  std::vector<ParamSpec> param_specs_;
  std::map<std::string, Tensor> tensors_;
  std::map<std::string, BatchNormParams> batch_norms_;
  AdamState optimizer_;
};

// Splits "a/b/gamma" into ("a/b", "gamma").
std::pair<std::string, std::string> SplitParamName(const std::string& name);

}  // namespace evopose

#endif  // EVOPOSE_NETWORK_H_
