// Copyright 2026 The MSD Authors.
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

#ifndef MSD_CORE_TENSOR_HPP_
#define MSD_CORE_TENSOR_HPP_

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "core/error.hpp"

namespace msd {

// Dense row-major tensor. Rank is dynamic but stays <= 4 in practice
// ([batch, time, channels] activations, [tap, in, out] kernels).
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::int64_t> shape) { Resize(std::move(shape)); }
  Tensor(std::initializer_list<std::int64_t> shape)
      : Tensor(std::vector<std::int64_t>(shape)) {}

  void Resize(std::vector<std::int64_t> shape) {
    shape_ = std::move(shape);
    std::int64_t n = 1;
    for (std::int64_t d : shape_) {
      if (d < 0) FailInternal("negative tensor dimension");
      n *= d;
    }
    data_.assign(static_cast<std::size_t>(n), T{0});
  }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t dim(std::size_t i) const { return shape_[i]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  const T& operator[](std::int64_t i) const {
    return data_[static_cast<std::size_t>(i)];
  }

  T& At(std::int64_t i, std::int64_t j) { return data_[i * shape_[1] + j]; }
  const T& At(std::int64_t i, std::int64_t j) const {
    return data_[i * shape_[1] + j];
  }
  T& At(std::int64_t i, std::int64_t j, std::int64_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const T& At(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void Fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  // Reinterprets the same row-major storage under a new shape.
  void ReshapeInPlace(std::vector<std::int64_t> shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) n *= d;
    if (n != numel()) FailInternal("reshape changes element count");
    shape_ = std::move(shape);
  }

  bool SameShape(const Tensor<T>& other) const {
    return shape_ == other.shape_;
  }

  template <typename U>
  Tensor<U> Cast() const {
    Tensor<U> out(shape_);
    for (std::int64_t i = 0; i < numel(); ++i)
      out[i] = static_cast<U>(data_[static_cast<std::size_t>(i)]);
    return out;
  }

 private:
  std::vector<std::int64_t> shape_;
  std::vector<T> data_;
};

}  // namespace msd

#endif  // MSD_CORE_TENSOR_HPP_
