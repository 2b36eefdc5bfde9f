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

#include "evopose/optimizer.h"

#include <cmath>

#include "evopose/error.h"

namespace evopose {

void AdamUpdate(Tensor& param, AdamSlot& slot, int64_t step, double lr,
                const AdamConfig& c) {
  if (!param.has_grad()) throw InvalidArgument("adam update on a tensor without grad");
  if (step < 1) throw InvalidArgument("adam step index must be >= 1");
  if (slot.m.shape() != param.shape()) slot.m = Tensor(param.shape());
  if (slot.v.shape() != param.shape()) slot.v = Tensor(param.shape());
  const auto g = param.grad();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (size_t i = 0; i < param.size(); ++i) {
    slot.m[i] = c.beta1 * slot.m[i] + (1.0 - c.beta1) * g[i];
    slot.v[i] = c.beta2 * slot.v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = slot.m[i] / bc1;
    const double v_hat = slot.v[i] / bc2;
    param[i] -= lr * (m_hat / (std::sqrt(v_hat) + c.epsilon) + c.weight_decay * param[i]);
  }
}

void AdamStep(std::map<std::string, Tensor*>& params, AdamState& state, double lr) {
  const int64_t step = state.step + 1;
  for (auto& [name, tensor] : params) {
    AdamUpdate(*tensor, state.slots[name], step, lr, state.config);
  }
  state.step = step;
}

}  // namespace evopose
