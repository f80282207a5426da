// src/autodiff/tensor.h

// Copyright 2026  The seqdistill Authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SEQDISTILL_AUTODIFF_TENSOR_H_
#define SEQDISTILL_AUTODIFF_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace seqdistill {

/// Dense row-major array of doubles. A shape of {} denotes a scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor Scalar(double value);
  static Tensor Zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor Filled(std::vector<int> shape, double value);
  static Tensor Matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor Vector(std::initializer_list<double> values);

  const std::vector<int>& Shape() const { return shape_; }
  int NumDims() const { return static_cast<int>(shape_.size()); }
  int Dim(int axis) const { return shape_.at(axis); }
  size_t Size() const { return data_.size(); }
  bool IsScalar() const { return data_.size() == 1; }

  // Matrix accessors; valid for 2-D tensors only.
  int Rows() const { return shape_[0]; }
  int Cols() const { return shape_[1]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }

  double operator[](size_t i) const { return data_[i]; }
  double& operator[](size_t i) { return data_[i]; }

  std::span<const double> Data() const { return data_; }
  std::span<double> MutableData() { return data_; }
  const double* Ptr() const { return data_.data(); }
  double* MutablePtr() { return data_.data(); }

  double Item() const;
  bool AllFinite() const;
  bool SameShape(const Tensor& other) const { return shape_ == other.shape_; }

  // In-place helpers used by gradient accumulation and optimizers.
  void AddInPlace(const Tensor& other, double scale = 1.0);
  void ScaleInPlace(double scale);
  void SetZero();

  // Bitwise comparison of shape and contents.
  bool BitwiseEqual(const Tensor& other) const;

  std::string ShapeString() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string ShapeToString(const std::vector<int>& shape);

}  // namespace seqdistill

#endif  // SEQDISTILL_AUTODIFF_TENSOR_H_
