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

#ifndef EVOPOSE_TENSOR_H_
#define EVOPOSE_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evopose {

using Shape = std::vector<int64_t>;

std::string ShapeToString(const Shape& shape);
int64_t NumElements(const Shape& shape);

// Dense row-major float64 array with an optional gradient buffer of the
// same shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Scalar(double value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const;
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  // Multi-index access; bounds are checked.
  double& at(std::initializer_list<int64_t> index);
  double at(std::initializer_list<int64_t> index) const;
  size_t Offset(std::initializer_list<int64_t> index) const;

  bool has_grad() const { return grad_.has_value(); }
  // Allocates a zero gradient if none exists.
  std::span<double> EnsureGrad();
  std::span<double> grad();
  std::span<const double> grad() const;
  void ZeroGrad();
  void ClearGrad() { grad_.reset(); }

  void Fill(double value);
  // Same data, new shape with equal element count.
  Tensor Reshaped(Shape shape) const;

  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }
  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
  std::optional<std::vector<double>> grad_;
};

// Throws ShapeError naming `what` when shapes differ.
void CheckSameShape(const Tensor& a, const Tensor& b, const std::string& what);

double L2Norm(std::span<const double> values);
double MaxAbsDiff(const Tensor& a, const Tensor& b);

}  // namespace evopose

#endif  // EVOPOSE_TENSOR_H_
