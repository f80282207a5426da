// src/autodiff/tensor.cc

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

#include "autodiff/tensor.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "base/error.h"

namespace seqdistill {

namespace {

size_t ShapeProduct(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) SEQDISTILL_THROW(ShapeError, "negative dimension in shape " << ShapeToString(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

}  // namespace

std::string ShapeToString(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(ShapeProduct(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeProduct(shape_) != data_.size())
    SEQDISTILL_THROW(ShapeError, "tensor of shape " << ShapeToString(shape_) << " given "
                                                    << data_.size() << " values");
}

Tensor Tensor::Scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::Filled(std::vector<int> shape, double value) {
  Tensor t(std::move(shape));
  for (double& v : t.data_) v = value;
  return t;
}

Tensor Tensor::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  int r = static_cast<int>(rows.size());
  int c = r ? static_cast<int>(rows.begin()->size()) : 0;
  std::vector<double> data;
  data.reserve(static_cast<size_t>(r) * c);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) throw ShapeError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

Tensor Tensor::Vector(std::initializer_list<double> values) {
  return Tensor({static_cast<int>(values.size())}, std::vector<double>(values));
}

double Tensor::Item() const {
  if (data_.size() != 1)
    SEQDISTILL_THROW(ShapeError, "Item() on non-scalar tensor " << ShapeString());
  return data_[0];
}

bool Tensor::AllFinite() const {
  // Exponent all ones means inf or NaN; the branch-free OR vectorizes.
  constexpr uint64_t kExponent = 0x7ff0000000000000ULL;
  uint64_t bad = 0;
  for (double v : data_) bad |= static_cast<uint64_t>((std::bit_cast<uint64_t>(v) & kExponent) == kExponent);
  return bad == 0;
}

void Tensor::AddInPlace(const Tensor& other, double scale) {
  if (other.data_.size() != data_.size())
    SEQDISTILL_THROW(ShapeError, "AddInPlace: " << ShapeString() << " vs " << other.ShapeString());
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

void Tensor::ScaleInPlace(double scale) {
  for (double& v : data_) v *= scale;
}

void Tensor::SetZero() {
  for (double& v : data_) v = 0.0;
}

bool Tensor::BitwiseEqual(const Tensor& other) const {
  return shape_ == other.shape_ &&
         (data_.empty() ||
          std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0);
}

std::string Tensor::ShapeString() const { return ShapeToString(shape_); }

}  // namespace seqdistill
