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

#include "evopose/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evopose/error.h"

namespace evopose {

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + ShapeToString(shape));
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<int64_t>(data_.size()) != NumElements(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + ShapeToString(shape_));
  }
}

int64_t Tensor::dim(int i) const {
  if (i < 0) i += rank();
  if (i < 0 || i >= rank()) {
    throw ShapeError("dim " + std::to_string(i) + " out of range for shape " +
                     ShapeToString(shape_));
  }
  return shape_[i];
}

size_t Tensor::Offset(std::initializer_list<int64_t> index) const {
  if (static_cast<int>(index.size()) != rank()) {
    throw ShapeError("index rank " + std::to_string(index.size()) +
                     " does not match shape " + ShapeToString(shape_));
  }
  size_t offset = 0;
  int axis = 0;
  for (int64_t i : index) {
    if (i < 0 || i >= shape_[axis]) {
      throw ShapeError("index " + std::to_string(i) + " out of range on dim " +
                       std::to_string(axis) + " of " + ShapeToString(shape_));
    }
    offset = offset * shape_[axis] + i;
    ++axis;
  }
  return offset;
}

double& Tensor::at(std::initializer_list<int64_t> index) { return data_[Offset(index)]; }
double Tensor::at(std::initializer_list<int64_t> index) const {
  return data_[Offset(index)];
}

std::span<double> Tensor::EnsureGrad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0);
  return *grad_;
}

std::span<double> Tensor::grad() {
  if (!grad_) throw InvalidArgument("tensor has no gradient");
  return *grad_;
}

std::span<const double> Tensor::grad() const {
  if (!grad_) throw InvalidArgument("tensor has no gradient");
  return *grad_;
}

void Tensor::ZeroGrad() {
  if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor Tensor::Reshaped(Shape shape) const {
  if (NumElements(shape) != static_cast<int64_t>(data_.size())) {
    throw ShapeError("cannot reshape " + ShapeToString(shape_) + " to " +
                     ShapeToString(shape));
  }
  return Tensor(std::move(shape), data_);
}

void CheckSameShape(const Tensor& a, const Tensor& b, const std::string& what) {
  if (!a.SameShape(b)) {
    throw ShapeError(what + ": shape " + ShapeToString(a.shape()) + " vs " +
                     ShapeToString(b.shape()));
  }
}

double L2Norm(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "MaxAbsDiff");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace evopose
