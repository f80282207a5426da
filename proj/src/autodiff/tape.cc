// src/autodiff/tape.cc

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

#include "autodiff/tape.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "base/error.h"

namespace seqdistill {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutableMap = Eigen::Map<RowMatrix>;

ConstMap AsMatrix(const Tensor& t) { return ConstMap(t.Ptr(), t.Rows(), t.Cols()); }
MutableMap AsMatrix(Tensor& t) { return MutableMap(t.MutablePtr(), t.Rows(), t.Cols()); }

void Require2d(Primitive kind, const Tensor& t, const char* which) {
  if (t.NumDims() != 2)
    SEQDISTILL_THROW(ShapeError, PrimitiveName(kind) << ": " << which << " must be 2-D, got "
                                                     << t.ShapeString());
}

void RequireVector(Primitive kind, const Tensor& t, int size, const char* which) {
  if (t.NumDims() != 1 || t.Dim(0) != size)
    SEQDISTILL_THROW(ShapeError, PrimitiveName(kind) << ": " << which << " must be [" << size
                                                     << "], got " << t.ShapeString());
}

void RequireArity(Primitive kind, size_t got, size_t want) {
  if (got != want)
    SEQDISTILL_THROW(ShapeError, PrimitiveName(kind) << ": expected " << want << " inputs, got "
                                                     << got);
}

// Strides for an axis split: outer * axis_len * inner == size.
void AxisSplit(const std::vector<int>& shape, int axis, size_t* outer, size_t* inner) {
  *outer = 1;
  *inner = 1;
  for (int i = 0; i < axis; ++i) *outer *= shape[i];
  for (size_t i = axis + 1; i < shape.size(); ++i) *inner *= shape[i];
}

// Normalisation over `groups` equal channel groups of every row.
void NormForward(const Tensor& x, const Tensor& gain, const Tensor& bias, int groups,
                 double epsilon, Tensor* out, Tensor* xhat, Tensor* inv_std) {
  int rows = x.Rows(), cols = x.Cols(), gsize = cols / groups;
  *out = Tensor({rows, cols});
  *xhat = Tensor({rows, cols});
  *inv_std = Tensor({rows, groups});
  for (int r = 0; r < rows; ++r) {
    for (int g = 0; g < groups; ++g) {
      int c0 = g * gsize;
      double mean = 0.0;
      for (int c = c0; c < c0 + gsize; ++c) mean += x(r, c);
      mean /= gsize;
      double var = 0.0;
      for (int c = c0; c < c0 + gsize; ++c) var += (x(r, c) - mean) * (x(r, c) - mean);
      var /= gsize;
      double rs = 1.0 / std::sqrt(var + epsilon);
      (*inv_std)(r, g) = rs;
      for (int c = c0; c < c0 + gsize; ++c) {
        double h = (x(r, c) - mean) * rs;
        (*xhat)(r, c) = h;
        (*out)(r, c) = gain[c] * h + bias[c];
      }
    }
  }
}

void NormBackward(const Tensor& grad_out, const Tensor& gain, const Tensor& xhat,
                  const Tensor& inv_std, int groups, Tensor* dx, Tensor* dgain, Tensor* dbias) {
  int rows = xhat.Rows(), cols = xhat.Cols(), gsize = cols / groups;
  std::vector<double> dh(gsize);
  for (int r = 0; r < rows; ++r) {
    for (int g = 0; g < groups; ++g) {
      int c0 = g * gsize;
      double mean_dh = 0.0, mean_dh_h = 0.0;
      for (int k = 0; k < gsize; ++k) {
        int c = c0 + k;
        double go = grad_out(r, c);
        if (dgain) (*dgain)[c] += go * xhat(r, c);
        if (dbias) (*dbias)[c] += go;
        dh[k] = go * gain[c];
        mean_dh += dh[k];
        mean_dh_h += dh[k] * xhat(r, c);
      }
      mean_dh /= gsize;
      mean_dh_h /= gsize;
      if (dx) {
        double rs = inv_std(r, g);
        for (int k = 0; k < gsize; ++k) {
          int c = c0 + k;
          (*dx)(r, c) += rs * (dh[k] - mean_dh - xhat(r, c) * mean_dh_h);
        }
      }
    }
  }
}

// im2col for Conv1d: [T_out x kernel*C_in].
Tensor Im2Col(const Tensor& x, int stride, int kernel, int shift, int t_out) {
  int t_in = x.Rows(), c_in = x.Cols();
  Tensor col({t_out, kernel * c_in});
  for (int t = 0; t < t_out; ++t) {
    int first = t * stride + stride - kernel + shift;
    double* dst = col.MutablePtr() + static_cast<size_t>(t) * kernel * c_in;
    for (int k = 0; k < kernel; ++k) {
      int src = first + k;
      if (src < 0 || src >= t_in) continue;
      const double* s = x.Ptr() + static_cast<size_t>(src) * c_in;
      std::copy(s, s + c_in, dst + static_cast<size_t>(k) * c_in);
    }
  }
  return col;
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

}  // namespace

std::string_view PrimitiveName(Primitive kind) {
  switch (kind) {
    case Primitive::kLeaf: return "leaf";
    case Primitive::kMatMul: return "matmul";
    case Primitive::kAdd: return "add";
    case Primitive::kScale: return "scale";
    case Primitive::kRelu: return "relu";
    case Primitive::kGelu: return "gelu";
    case Primitive::kLayerNorm: return "layer_norm";
    case Primitive::kSoftmaxRows: return "softmax_rows";
    case Primitive::kMseReduce: return "mse_reduce";
    case Primitive::kTranspose: return "transpose";
    case Primitive::kSlice: return "slice";
    case Primitive::kConcat: return "concat";
    case Primitive::kEmbedLookup: return "embed_lookup";
    case Primitive::kAddBias: return "add_bias";
    case Primitive::kConv1d: return "conv1d";
    case Primitive::kGroupNorm: return "group_norm";
    case Primitive::kLogSoftmaxRows: return "log_softmax_rows";
    case Primitive::kExternalLoss: return "external_loss";
  }
  return "unknown";
}

const Tensor& Var::value() const { return tape_->Value(*this); }

void Tape::CheckOwned(Var v, std::string_view what) const {
  if (v.tape_ != this || v.index_ < 0 || v.index_ >= static_cast<int>(nodes_.size()))
    SEQDISTILL_THROW(std::invalid_argument, what << ": value is not recorded on this tape");
}

Var Tape::Constant(Tensor value) {
  if (!value.AllFinite()) throw std::invalid_argument("constant: non-finite value");
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Variable(Tensor value, int id) {
  if (!value.AllFinite()) throw std::invalid_argument("variable: non-finite value");
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  node.param_id = id;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tensor& Tape::Value(Var v) const {
  CheckOwned(v, "value");
  return nodes_[v.index_].value;
}

bool Tape::RequiresGrad(Var v) const {
  CheckOwned(v, "requires_grad");
  return nodes_[v.index_].requires_grad;
}

Var Tape::Apply(Primitive kind, std::span<const Var> inputs, PrimitiveAttrs attrs) {
  for (const Var& v : inputs) CheckOwned(v, PrimitiveName(kind));
  Node node;
  node.kind = kind;
  node.attrs = std::move(attrs);
  for (const Var& v : inputs) {
    node.inputs.push_back(v.index_);
    node.requires_grad = node.requires_grad || nodes_[v.index_].requires_grad;
  }
  auto in = [&](size_t i) -> const Tensor& { return nodes_[node.inputs[i]].value; };
  const PrimitiveAttrs& at = node.attrs;

  switch (kind) {
    case Primitive::kLeaf:
      throw std::invalid_argument("leaf: use Constant() or Variable()");
    case Primitive::kMatMul: {
      RequireArity(kind, inputs.size(), 2);
      Require2d(kind, in(0), "lhs");
      Require2d(kind, in(1), "rhs");
      if (in(0).Cols() != in(1).Rows())
        SEQDISTILL_THROW(ShapeError, "matmul: inner dimensions differ, " << in(0).ShapeString()
                                                                        << " x "
                                                                        << in(1).ShapeString());
      node.value = Tensor({in(0).Rows(), in(1).Cols()});
      if (in(0).Cols() > 0) AsMatrix(node.value).noalias() = AsMatrix(in(0)) * AsMatrix(in(1));
      break;
    }
    case Primitive::kAdd: {
      RequireArity(kind, inputs.size(), 2);
      if (!in(0).SameShape(in(1)))
        SEQDISTILL_THROW(ShapeError, "add: shapes differ, " << in(0).ShapeString() << " vs "
                                                            << in(1).ShapeString());
      node.value = in(0);
      node.value.AddInPlace(in(1));
      break;
    }
    case Primitive::kScale: {
      RequireArity(kind, inputs.size(), 1);
      node.value = in(0);
      node.value.ScaleInPlace(at.scalar);
      break;
    }
    case Primitive::kRelu: {
      RequireArity(kind, inputs.size(), 1);
      node.value = in(0);
      for (double& v : node.value.MutableData()) v = v > 0.0 ? v : 0.0;
      break;
    }
    case Primitive::kGelu: {
      RequireArity(kind, inputs.size(), 1);
      node.value = in(0);
      for (double& v : node.value.MutableData()) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
      break;
    }
    case Primitive::kLayerNorm:
    case Primitive::kGroupNorm: {
      RequireArity(kind, inputs.size(), 3);
      Require2d(kind, in(0), "input");
      int cols = in(0).Cols();
      RequireVector(kind, in(1), cols, "gain");
      RequireVector(kind, in(2), cols, "bias");
      int groups = kind == Primitive::kLayerNorm ? 1 : at.groups;
      if (groups < 1 || cols % groups != 0)
        SEQDISTILL_THROW(ShapeError, PrimitiveName(kind) << ": " << cols
                                                         << " channels not divisible into "
                                                         << groups << " groups");
      node.attrs.groups = groups;
      NormForward(in(0), in(1), in(2), groups, at.epsilon, &node.value, &node.saved, &node.saved2);
      break;
    }
    case Primitive::kSoftmaxRows:
    case Primitive::kLogSoftmaxRows: {
      RequireArity(kind, inputs.size(), 1);
      Require2d(kind, in(0), "input");
      const Tensor& x = in(0);
      int rows = x.Rows(), cols = x.Cols();
      const std::vector<uint8_t>* mask = at.mask.get();
      if (mask && mask->size() != static_cast<size_t>(rows) * cols)
        SEQDISTILL_THROW(ShapeError, PrimitiveName(kind) << ": mask has " << mask->size()
                                                         << " entries for input "
                                                         << x.ShapeString());
      if (mask && kind == Primitive::kLogSoftmaxRows)
        throw std::invalid_argument("log_softmax_rows: masks are not supported");
      node.value = Tensor({rows, cols});
      for (int r = 0; r < rows; ++r) {
        const uint8_t* allow = mask ? mask->data() + static_cast<size_t>(r) * cols : nullptr;
        double mx = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < cols; ++c)
          if (!allow || allow[c]) mx = std::max(mx, x(r, c));
        if (mx == -std::numeric_limits<double>::infinity())
          SEQDISTILL_THROW(std::invalid_argument,
                           PrimitiveName(kind) << ": row " << r << " has no unmasked entry");
        double sum = 0.0;
        for (int c = 0; c < cols; ++c)
          if (!allow || allow[c]) sum += std::exp(x(r, c) - mx);
        if (kind == Primitive::kSoftmaxRows) {
          for (int c = 0; c < cols; ++c)
            node.value(r, c) = (!allow || allow[c]) ? std::exp(x(r, c) - mx) / sum : 0.0;
        } else {
          double lse = mx + std::log(sum);
          for (int c = 0; c < cols; ++c) node.value(r, c) = x(r, c) - lse;
        }
      }
      break;
    }
    case Primitive::kMseReduce: {
      RequireArity(kind, inputs.size(), 2);
      if (!in(0).SameShape(in(1)))
        SEQDISTILL_THROW(ShapeError, "mse_reduce: shapes differ, " << in(0).ShapeString()
                                                                   << " vs "
                                                                   << in(1).ShapeString());
      if (in(0).Size() == 0) throw ShapeError("mse_reduce: empty input");
      double acc = 0.0;
      for (size_t i = 0; i < in(0).Size(); ++i) {
        double d = in(0)[i] - in(1)[i];
        acc += d * d;
      }
      node.value = Tensor::Scalar(acc / static_cast<double>(in(0).Size()));
      break;
    }
    case Primitive::kTranspose: {
      RequireArity(kind, inputs.size(), 1);
      Require2d(kind, in(0), "input");
      const Tensor& x = in(0);
      node.value = Tensor({x.Cols(), x.Rows()});
      for (int r = 0; r < x.Rows(); ++r)
        for (int c = 0; c < x.Cols(); ++c) node.value(c, r) = x(r, c);
      break;
    }
    case Primitive::kSlice: {
      RequireArity(kind, inputs.size(), 1);
      const Tensor& x = in(0);
      if (at.axis < 0 || at.axis >= x.NumDims() || at.begin < 0 || at.end > x.Dim(at.axis) ||
          at.begin > at.end)
        SEQDISTILL_THROW(ShapeError, "slice: range [" << at.begin << ", " << at.end
                                                      << ") on axis " << at.axis
                                                      << " invalid for " << x.ShapeString());
      size_t outer, inner;
      AxisSplit(x.Shape(), at.axis, &outer, &inner);
      std::vector<int> shape = x.Shape();
      shape[at.axis] = at.end - at.begin;
      node.value = Tensor(shape);
      size_t len = static_cast<size_t>(at.end - at.begin) * inner;
      size_t src_stride = static_cast<size_t>(x.Dim(at.axis)) * inner;
      for (size_t o = 0; o < outer; ++o)
        std::copy(x.Ptr() + o * src_stride + at.begin * inner,
                  x.Ptr() + o * src_stride + at.begin * inner + len,
                  node.value.MutablePtr() + o * len);
      break;
    }
    case Primitive::kConcat: {
      if (inputs.empty()) throw ShapeError("concat: no inputs");
      const Tensor& first = in(0);
      if (at.axis < 0 || at.axis >= first.NumDims())
        SEQDISTILL_THROW(ShapeError, "concat: axis " << at.axis << " invalid for "
                                                     << first.ShapeString());
      std::vector<int> shape = first.Shape();
      int total = 0;
      for (size_t i = 0; i < inputs.size(); ++i) {
        std::vector<int> s = in(i).Shape();
        if (s.size() != shape.size())
          SEQDISTILL_THROW(ShapeError, "concat: rank mismatch " << first.ShapeString() << " vs "
                                                                << in(i).ShapeString());
        total += s[at.axis];
        s[at.axis] = shape[at.axis];
        if (s != shape)
          SEQDISTILL_THROW(ShapeError, "concat: non-axis dims differ, " << first.ShapeString()
                                                                        << " vs "
                                                                        << in(i).ShapeString());
      }
      shape[at.axis] = total;
      node.value = Tensor(shape);
      size_t outer, inner;
      AxisSplit(shape, at.axis, &outer, &inner);
      size_t dst_stride = static_cast<size_t>(total) * inner;
      size_t offset = 0;
      for (size_t i = 0; i < inputs.size(); ++i) {
        size_t len = static_cast<size_t>(in(i).Dim(at.axis)) * inner;
        for (size_t o = 0; o < outer; ++o)
          std::copy(in(i).Ptr() + o * len, in(i).Ptr() + (o + 1) * len,
                    node.value.MutablePtr() + o * dst_stride + offset);
        offset += len;
      }
      break;
    }
    case Primitive::kEmbedLookup: {
      RequireArity(kind, inputs.size(), 1);
      Require2d(kind, in(0), "table");
      const Tensor& table = in(0);
      int n = static_cast<int>(at.indices.size()), d = table.Cols();
      node.value = Tensor({n, d});
      for (int i = 0; i < n; ++i) {
        int row = at.indices[i];
        if (row < 0 || row >= table.Rows())
          SEQDISTILL_THROW(ShapeError, "embed_lookup: index " << row << " outside table "
                                                              << table.ShapeString());
        for (int c = 0; c < d; ++c) node.value(i, c) = table(row, c);
      }
      break;
    }
    case Primitive::kAddBias: {
      RequireArity(kind, inputs.size(), 2);
      Require2d(kind, in(0), "input");
      RequireVector(kind, in(1), in(0).Cols(), "bias");
      node.value = in(0);
      for (int r = 0; r < node.value.Rows(); ++r)
        for (int c = 0; c < node.value.Cols(); ++c) node.value(r, c) += in(1)[c];
      break;
    }
    case Primitive::kConv1d: {
      RequireArity(kind, inputs.size(), 2);
      Require2d(kind, in(0), "input");
      Require2d(kind, in(1), "weight");
      if (at.stride < 1 || at.kernel < 1)
        SEQDISTILL_THROW(ShapeError, "conv1d: stride " << at.stride << " kernel " << at.kernel);
      int c_in = in(0).Cols();
      if (in(1).Rows() != at.kernel * c_in)
        SEQDISTILL_THROW(ShapeError, "conv1d: weight " << in(1).ShapeString() << " needs "
                                                       << at.kernel * c_in << " rows for input "
                                                       << in(0).ShapeString() << " and kernel "
                                                       << at.kernel);
      int t_out = in(0).Rows() / at.stride;
      node.saved = Im2Col(in(0), at.stride, at.kernel, at.shift, t_out);
      node.value = Tensor({t_out, in(1).Cols()});
      if (t_out > 0) AsMatrix(node.value).noalias() = AsMatrix(node.saved) * AsMatrix(in(1));
      break;
    }
    case Primitive::kExternalLoss: {
      RequireArity(kind, inputs.size(), 1);
      if (!at.external_grad || !at.external_grad->SameShape(in(0)))
        SEQDISTILL_THROW(ShapeError, "external_loss: gradient shape must match input "
                                         << in(0).ShapeString());
      node.value = Tensor::Scalar(at.external_value);
      break;
    }
  }
  if (!node.value.AllFinite())
    SEQDISTILL_THROW(std::domain_error, PrimitiveName(kind) << ": non-finite output");
  if (!node.requires_grad) {
    node.saved = Tensor();
    node.saved2 = Tensor();
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor& Tape::GradSlot(int index) {
  if (!has_grad_[index]) {
    grads_[index] = Tensor(nodes_[index].value.Shape());
    has_grad_[index] = true;
  }
  return grads_[index];
}

GradientMap Tape::Backward(Var loss) {
  if (loss.tape_ != this) throw std::invalid_argument("backward: loss is not on this tape");
  CheckOwned(loss, "backward");
  const Node& root = nodes_[loss.index_];
  if (root.value.Size() != 1)
    SEQDISTILL_THROW(ShapeError, "backward: loss must be scalar, got " << root.value.ShapeString());
  grads_.assign(nodes_.size(), Tensor());
  has_grad_.assign(nodes_.size(), false);
  GradSlot(loss.index_)[0] = 1.0;
  for (int i = loss.index_; i >= 0; --i) {
    const Node& node = nodes_[i];
    if (!node.requires_grad || !has_grad_[i] || node.kind == Primitive::kLeaf) continue;
    BackwardNode(node, grads_[i]);
  }
  GradientMap out;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    if (node.kind != Primitive::kLeaf || !node.requires_grad) continue;
    auto it = out.find(node.param_id);
    Tensor g = has_grad_[i] ? grads_[i] : Tensor(node.value.Shape());
    if (it == out.end()) {
      out.emplace(node.param_id, std::move(g));
    } else {
      it->second.AddInPlace(g);
    }
  }
  return out;
}

Tensor Tape::Grad(Var v) const {
  CheckOwned(v, "grad");
  if (static_cast<size_t>(v.index_) < has_grad_.size() && has_grad_[v.index_])
    return grads_[v.index_];
  return Tensor(nodes_[v.index_].value.Shape());
}

void Tape::BackwardNode(const Node& node, const Tensor& g) {
  auto in = [&](size_t i) -> const Tensor& { return nodes_[node.inputs[i]].value; };
  auto wants = [&](size_t i) { return nodes_[node.inputs[i]].requires_grad; };
  auto slot = [&](size_t i) -> Tensor& { return GradSlot(node.inputs[i]); };
  const PrimitiveAttrs& at = node.attrs;

  switch (node.kind) {
    case Primitive::kLeaf:
      break;
    case Primitive::kMatMul: {
      if (g.Size() == 0 || in(0).Cols() == 0) break;
      if (wants(0)) AsMatrix(slot(0)).noalias() += AsMatrix(g) * AsMatrix(in(1)).transpose();
      if (wants(1)) AsMatrix(slot(1)).noalias() += AsMatrix(in(0)).transpose() * AsMatrix(g);
      break;
    }
    case Primitive::kAdd:
      if (wants(0)) slot(0).AddInPlace(g);
      if (wants(1)) slot(1).AddInPlace(g);
      break;
    case Primitive::kScale:
      if (wants(0)) slot(0).AddInPlace(g, at.scalar);
      break;
    case Primitive::kRelu: {
      if (!wants(0)) break;
      Tensor& d = slot(0);
      for (size_t i = 0; i < g.Size(); ++i)
        if (in(0)[i] > 0.0) d[i] += g[i];
      break;
    }
    case Primitive::kGelu: {
      if (!wants(0)) break;
      Tensor& d = slot(0);
      for (size_t i = 0; i < g.Size(); ++i) {
        double x = in(0)[i];
        double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        d[i] += g[i] * (cdf + x * pdf);
      }
      break;
    }
    case Primitive::kLayerNorm:
    case Primitive::kGroupNorm:
      NormBackward(g, in(1), node.saved, node.saved2, at.groups, wants(0) ? &slot(0) : nullptr,
                   wants(1) ? &slot(1) : nullptr, wants(2) ? &slot(2) : nullptr);
      break;
    case Primitive::kSoftmaxRows: {
      if (!wants(0)) break;
      Tensor& d = slot(0);
      const Tensor& y = node.value;
      for (int r = 0; r < y.Rows(); ++r) {
        double dot = 0.0;
        for (int c = 0; c < y.Cols(); ++c) dot += g(r, c) * y(r, c);
        for (int c = 0; c < y.Cols(); ++c) d(r, c) += y(r, c) * (g(r, c) - dot);
      }
      break;
    }
    case Primitive::kLogSoftmaxRows: {
      if (!wants(0)) break;
      Tensor& d = slot(0);
      const Tensor& y = node.value;
      for (int r = 0; r < y.Rows(); ++r) {
        double sum = 0.0;
        for (int c = 0; c < y.Cols(); ++c) sum += g(r, c);
        for (int c = 0; c < y.Cols(); ++c) d(r, c) += g(r, c) - std::exp(y(r, c)) * sum;
      }
      break;
    }
    case Primitive::kMseReduce: {
      double k = 2.0 * g[0] / static_cast<double>(in(0).Size());
      if (wants(0)) {
        Tensor& d = slot(0);
        for (size_t i = 0; i < d.Size(); ++i) d[i] += k * (in(0)[i] - in(1)[i]);
      }
      if (wants(1)) {
        Tensor& d = slot(1);
        for (size_t i = 0; i < d.Size(); ++i) d[i] -= k * (in(0)[i] - in(1)[i]);
      }
      break;
    }
    case Primitive::kTranspose: {
      if (!wants(0)) break;
      Tensor& d = slot(0);
      for (int r = 0; r < g.Rows(); ++r)
        for (int c = 0; c < g.Cols(); ++c) d(c, r) += g(r, c);
      break;
    }
    case Primitive::kSlice: {
      if (!wants(0)) break;
      Tensor& d = slot(0);
      size_t outer, inner;
      AxisSplit(d.Shape(), at.axis, &outer, &inner);
      size_t len = static_cast<size_t>(at.end - at.begin) * inner;
      size_t stride = static_cast<size_t>(d.Dim(at.axis)) * inner;
      for (size_t o = 0; o < outer; ++o)
        for (size_t j = 0; j < len; ++j) d[o * stride + at.begin * inner + j] += g[o * len + j];
      break;
    }
    case Primitive::kConcat: {
      size_t outer, inner;
      AxisSplit(g.Shape(), at.axis, &outer, &inner);
      size_t stride = static_cast<size_t>(g.Dim(at.axis)) * inner;
      size_t offset = 0;
      for (size_t i = 0; i < node.inputs.size(); ++i) {
        size_t len = static_cast<size_t>(in(i).Dim(at.axis)) * inner;
        if (wants(i)) {
          Tensor& d = slot(i);
          for (size_t o = 0; o < outer; ++o)
            for (size_t j = 0; j < len; ++j) d[o * len + j] += g[o * stride + offset + j];
        }
        offset += len;
      }
      break;
    }
    case Primitive::kEmbedLookup: {
      if (!wants(0)) break;
      Tensor& d = slot(0);
      for (size_t i = 0; i < at.indices.size(); ++i)
        for (int c = 0; c < d.Cols(); ++c) d(at.indices[i], c) += g(static_cast<int>(i), c);
      break;
    }
    case Primitive::kAddBias: {
      if (wants(0)) slot(0).AddInPlace(g);
      if (wants(1)) {
        Tensor& d = slot(1);
        for (int r = 0; r < g.Rows(); ++r)
          for (int c = 0; c < g.Cols(); ++c) d[c] += g(r, c);
      }
      break;
    }
    case Primitive::kConv1d: {
      if (g.Rows() == 0) break;
      if (wants(1)) AsMatrix(slot(1)).noalias() += AsMatrix(node.saved).transpose() * AsMatrix(g);
      if (wants(0)) {
        Tensor dcol({node.saved.Rows(), node.saved.Cols()});
        AsMatrix(dcol).noalias() = AsMatrix(g) * AsMatrix(in(1)).transpose();
        Tensor& d = slot(0);
        int t_in = d.Rows(), c_in = d.Cols();
        for (int t = 0; t < dcol.Rows(); ++t) {
          int first = t * at.stride + at.stride - at.kernel + at.shift;
          for (int k = 0; k < at.kernel; ++k) {
            int src = first + k;
            if (src < 0 || src >= t_in) continue;
            for (int c = 0; c < c_in; ++c) d(src, c) += dcol(t, k * c_in + c);
          }
        }
      }
      break;
    }
    case Primitive::kExternalLoss:
      if (wants(0)) slot(0).AddInPlace(*at.external_grad, g[0]);
      break;
  }
}

namespace {

Var ApplyOn(Primitive kind, std::initializer_list<Var> inputs, PrimitiveAttrs attrs = {}) {
  Tape* tape = inputs.begin()->tape();
  if (!tape) SEQDISTILL_THROW(std::invalid_argument, PrimitiveName(kind) << ": unbound input");
  return tape->Apply(kind, std::span<const Var>(inputs.begin(), inputs.size()), std::move(attrs));
}

}  // namespace

Var MatMul(Var a, Var b) { return ApplyOn(Primitive::kMatMul, {a, b}); }
Var Add(Var a, Var b) { return ApplyOn(Primitive::kAdd, {a, b}); }

Var Scale(Var x, double factor) {
  PrimitiveAttrs at;
  at.scalar = factor;
  return ApplyOn(Primitive::kScale, {x}, std::move(at));
}

Var Relu(Var x) { return ApplyOn(Primitive::kRelu, {x}); }
Var Gelu(Var x) { return ApplyOn(Primitive::kGelu, {x}); }

Var LayerNorm(Var x, Var gain, Var bias, double epsilon) {
  PrimitiveAttrs at;
  at.epsilon = epsilon;
  return ApplyOn(Primitive::kLayerNorm, {x, gain, bias}, std::move(at));
}

Var SoftmaxRows(Var x, std::shared_ptr<const std::vector<uint8_t>> mask) {
  PrimitiveAttrs at;
  at.mask = std::move(mask);
  return ApplyOn(Primitive::kSoftmaxRows, {x}, std::move(at));
}

Var LogSoftmaxRows(Var x) { return ApplyOn(Primitive::kLogSoftmaxRows, {x}); }
Var MseReduce(Var a, Var b) { return ApplyOn(Primitive::kMseReduce, {a, b}); }
Var Transpose(Var x) { return ApplyOn(Primitive::kTranspose, {x}); }

Var Slice(Var x, int axis, int begin, int end) {
  PrimitiveAttrs at;
  at.axis = axis;
  at.begin = begin;
  at.end = end;
  return ApplyOn(Primitive::kSlice, {x}, std::move(at));
}

Var Concat(std::span<const Var> parts, int axis) {
  if (parts.empty() || !parts[0].tape()) throw ShapeError("concat: no inputs");
  PrimitiveAttrs at;
  at.axis = axis;
  return parts[0].tape()->Apply(Primitive::kConcat, parts, std::move(at));
}

Var EmbedLookup(Var table, std::vector<int> indices) {
  PrimitiveAttrs at;
  at.indices = std::move(indices);
  return ApplyOn(Primitive::kEmbedLookup, {table}, std::move(at));
}

Var AddBias(Var x, Var bias) { return ApplyOn(Primitive::kAddBias, {x, bias}); }

Var Conv1d(Var x, Var weight, int stride, int kernel, int shift) {
  PrimitiveAttrs at;
  at.stride = stride;
  at.kernel = kernel;
  at.shift = shift;
  return ApplyOn(Primitive::kConv1d, {x, weight}, std::move(at));
}

Var GroupNorm(Var x, Var gain, Var bias, int groups, double epsilon) {
  PrimitiveAttrs at;
  at.groups = groups;
  at.epsilon = epsilon;
  return ApplyOn(Primitive::kGroupNorm, {x, gain, bias}, std::move(at));
}

Var ExternalLoss(Var x, double value, Tensor grad) {
  PrimitiveAttrs at;
  at.external_value = value;
  at.external_grad = std::make_shared<const Tensor>(std::move(grad));
  return ApplyOn(Primitive::kExternalLoss, {x}, std::move(at));
}

}  // namespace seqdistill
