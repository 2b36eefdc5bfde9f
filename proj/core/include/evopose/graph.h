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

#ifndef EVOPOSE_GRAPH_H_
#define EVOPOSE_GRAPH_H_

#include <functional>
#include <memory>
#include <vector>

#include "evopose/conv.h"
#include "evopose/layers.h"
#include "evopose/tensor.h"

namespace evopose {

// Reverse-mode tape over the layer primitives. Nodes are appended in
// evaluation order; Backward() walks them in reverse. Parameter nodes alias
// caller-owned tensors and accumulate into their gradient buffers.
class Graph {
 public:
  using Id = int;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Id Constant(Tensor value);
  Id Parameter(Tensor* param);

  const Tensor& value(Id id) const;
  // Gradient accumulated at `id` by the last Backward(); empty if none.
  const Tensor& grad(Id id) const;
  size_t size() const { return nodes_.size(); }

  Id Conv(Id x, Id kernel, int stride, ConvKind kind, int dilation = 1);
  Id BiasAdd(Id x, Id bias);
  // `stats` must outlive the graph; moving statistics update during forward.
  Id BatchNorm(Id x, Id gamma, Id beta, BatchNormParams* stats, bool training);
  Id Dense(Id x, Id weight, Id bias);
  Id GlobalAvgPool(Id x);
  Id Swish(Id x);
  Id Sigmoid(Id x);
  Id Add(Id a, Id b);
  Id ChannelScale(Id x, Id gate);

  // Seeds d(out) = grad_out and propagates to every reachable node.
  void Backward(Id out, const Tensor& grad_out);

 private:
  struct Node {
    Tensor value;
    Tensor* external = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::function<void(Graph&)> backward;
  };

  Id Push(Tensor value, bool requires_grad);
  Node& node(Id id);
  const Node& node(Id id) const;
  bool Requires(Id id) const { return node(id).requires_grad; }
  void Accumulate(Id id, const Tensor& g);

  std::vector<std::unique_ptr<Node>> nodes_;
};

}  // namespace evopose

#endif  // EVOPOSE_GRAPH_H_
