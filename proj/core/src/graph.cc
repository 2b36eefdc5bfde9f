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

#include "evopose/graph.h"

#include <string>

#include "evopose/error.h"

namespace evopose {

Graph::Id Graph::Push(Tensor value, bool requires_grad) {
  auto n = std::make_unique<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Graph::Node& Graph::node(Id id) {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) {
    throw InvalidArgument("graph node " + std::to_string(id) + " does not exist");
  }
  return *nodes_[id];
}

const Graph::Node& Graph::node(Id id) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) {
    throw InvalidArgument("graph node " + std::to_string(id) + " does not exist");
  }
  return *nodes_[id];
}

Graph::Id Graph::Constant(Tensor value) { return Push(std::move(value), false); }

Graph::Id Graph::Parameter(Tensor* param) {
  Id id = Push(Tensor(), true);
  node(id).external = param;
  return id;
}

const Tensor& Graph::value(Id id) const {
  const Node& n = node(id);
  return n.external ? *n.external : n.value;
}

const Tensor& Graph::grad(Id id) const { return node(id).grad; }

void Graph::Accumulate(Id id, const Tensor& g) {
  Node& n = node(id);
  if (!n.requires_grad) return;
  if (n.external) {
    auto dst = n.external->EnsureGrad();
    for (size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    for (size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
  }
}

Graph::Id Graph::Conv(Id x, Id kernel, int stride, ConvKind kind, int dilation) {
  ConvParams p{value(kernel), stride, dilation, kind};
  Tensor y = Convolve(value(x), p);
  const bool req = Requires(x) || Requires(kernel);
  Id id = Push(std::move(y), req);
  node(id).backward = [=](Graph& g) {
    const ConvParams params{g.value(kernel), stride, dilation, kind};
    ConvGrads grads = ConvolveBackward(g.value(x), params, g.node(id).grad);
    g.Accumulate(x, grads.input);
    g.Accumulate(kernel, grads.kernel);
  };
  return id;
}

Graph::Id Graph::BiasAdd(Id x, Id bias) {
  Id id = Push(BiasAddForward(value(x), value(bias)), Requires(x) || Requires(bias));
  node(id).backward = [=](Graph& g) {
    const Tensor& gy = g.node(id).grad;
    g.Accumulate(x, gy);
    g.Accumulate(bias, BiasAddBackwardBias(gy, g.value(bias).size()));
  };
  return id;
}

Graph::Id Graph::BatchNorm(Id x, Id gamma, Id beta, BatchNormParams* stats,
                           bool training) {
  // The gamma/beta nodes alias stats->gamma / stats->beta.
  auto fwd = std::make_shared<BatchNormResult>(BatchNormForward(value(x), *stats, training));
  Tensor out = fwd->output;
  Id id = Push(std::move(out), Requires(x) || Requires(gamma) || Requires(beta));
  node(id).backward = [=](Graph& g) {
    BatchNormGrads grads = BatchNormBackward(*fwd, *stats, g.node(id).grad, training);
    g.Accumulate(x, grads.input);
    g.Accumulate(gamma, grads.gamma);
    g.Accumulate(beta, grads.beta);
  };
  return id;
}

Graph::Id Graph::Dense(Id x, Id weight, Id bias) {
  Id id = Push(DenseForward(value(x), value(weight), value(bias)),
               Requires(x) || Requires(weight) || Requires(bias));
  node(id).backward = [=](Graph& g) {
    DenseGrads grads = DenseBackward(g.value(x), g.value(weight), g.node(id).grad);
    g.Accumulate(x, grads.input);
    g.Accumulate(weight, grads.weight);
    g.Accumulate(bias, grads.bias);
  };
  return id;
}

Graph::Id Graph::GlobalAvgPool(Id x) {
  Id id = Push(evopose::GlobalAvgPool(value(x)), Requires(x));
  node(id).backward = [=](Graph& g) {
    g.Accumulate(x, GlobalAvgPoolBackward(g.value(x).shape(), g.node(id).grad));
  };
  return id;
}

Graph::Id Graph::Swish(Id x) {
  Id id = Push(SwishForward(value(x)), Requires(x));
  node(id).backward = [=](Graph& g) {
    g.Accumulate(x, SwishBackward(g.value(x), g.node(id).grad));
  };
  return id;
}

Graph::Id Graph::Sigmoid(Id x) {
  Id id = Push(SigmoidForward(value(x)), Requires(x));
  node(id).backward = [=](Graph& g) {
    g.Accumulate(x, SigmoidBackward(g.value(id), g.node(id).grad));
  };
  return id;
}

Graph::Id Graph::Add(Id a, Id b) {
  Id id = Push(AddForward(value(a), value(b)), Requires(a) || Requires(b));
  node(id).backward = [=](Graph& g) {
    g.Accumulate(a, g.node(id).grad);
    g.Accumulate(b, g.node(id).grad);
  };
  return id;
}

Graph::Id Graph::ChannelScale(Id x, Id gate) {
  Id id = Push(ChannelScaleForward(value(x), value(gate)), Requires(x) || Requires(gate));
  node(id).backward = [=](Graph& g) {
    ChannelScaleGrads grads =
        ChannelScaleBackward(g.value(x), g.value(gate), g.node(id).grad);
    g.Accumulate(x, grads.input);
    g.Accumulate(gate, grads.gate);
  };
  return id;
}

void Graph::Backward(Id out, const Tensor& grad_out) {
  CheckSameShape(value(out), grad_out, "graph backward seed");
  for (auto& n : nodes_) {
    n->has_grad = false;
    n->grad = Tensor();
  }
  Node& root = node(out);
  root.grad = grad_out;
  root.has_grad = true;
  if (root.external) {
    auto dst = root.external->EnsureGrad();
    for (size_t i = 0; i < grad_out.size(); ++i) dst[i] += grad_out[i];
  }
  for (Id id = out; id >= 0; --id) {
    Node& n = *nodes_[id];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    n.backward(*this);
    // Intermediate gradients are not needed after propagation.
    if (id != out) n.grad = Tensor();
  }
}

}  // namespace evopose
