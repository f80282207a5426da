// src/autodiff/tape.h

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

#ifndef SEQDISTILL_AUTODIFF_TAPE_H_
#define SEQDISTILL_AUTODIFF_TAPE_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "autodiff/tensor.h"

namespace seqdistill {

enum class Primitive {
  kLeaf,
  kMatMul,         // [n x k] * [k x m]
  kAdd,            // elementwise, identical shapes
  kScale,          // x * attrs.scalar
  kRelu,
  kGelu,           // exact erf form
  kLayerNorm,      // rows of [n x d], with gain [d] and bias [d]
  kSoftmaxRows,    // optional attrs.mask of allowed entries
  kMseReduce,      // mean((a - b)^2) -> scalar
  kTranspose,      // 2-D
  kSlice,          // [begin, end) along attrs.axis
  kConcat,         // along attrs.axis
  kEmbedLookup,    // rows of a [V x d] table at attrs.indices
  kAddBias,        // [n x d] + [d]
  kConv1d,         // time-major strided convolution, see Conv1d()
  kGroupNorm,      // per-row normalisation within attrs.groups channel groups
  kLogSoftmaxRows,
  kExternalLoss,   // scalar with a caller-supplied gradient w.r.t. its input
};

std::string_view PrimitiveName(Primitive kind);

struct PrimitiveAttrs {
  double scalar = 1.0;
  int axis = 0;
  int begin = 0;
  int end = 0;
  int groups = 1;
  double epsilon = 1e-5;
  int stride = 1;
  int kernel = 1;
  int shift = 0;
  // Row-major [rows x cols] flags; nonzero means the entry takes part.
  std::shared_ptr<const std::vector<uint8_t>> mask;
  std::vector<int> indices;
  double external_value = 0.0;
  std::shared_ptr<const Tensor> external_grad;
};

class Tape;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Tape* tape() const { return tape_; }
  int index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }
  const Tensor& value() const;

 private:
  friend class Tape;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  int index_ = -1;
};

// Parameter id -> gradient.
using GradientMap = std::map<int, Tensor>;

/// Records primitive applications in topological order and runs
/// reverse-mode differentiation over them. Single owner; not thread safe.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // A leaf that requires gradients; `id` keys it in the GradientMap.
  Var Variable(Tensor value, int id);

  Var Apply(Primitive kind, std::span<const Var> inputs, PrimitiveAttrs attrs = {});

  const Tensor& Value(Var v) const;
  bool RequiresGrad(Var v) const;

  // Gradients of a scalar `loss` for every Variable on this tape. Leaves
  // the loss does not depend on get zero tensors.
  GradientMap Backward(Var loss);

  // Gradient of an arbitrary node from the last Backward() call.
  Tensor Grad(Var v) const;

  size_t NumNodes() const { return nodes_.size(); }

 private:
  struct Node {
    Primitive kind = Primitive::kLeaf;
    std::vector<int> inputs;
    Tensor value;
    bool requires_grad = false;
    int param_id = -1;
    PrimitiveAttrs attrs;
    Tensor saved;   // primitive-specific activations kept for backward
    Tensor saved2;
  };

  void CheckOwned(Var v, std::string_view what) const;
  void BackwardNode(const Node& node, const Tensor& grad_out);
  Tensor& GradSlot(int index);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<bool> has_grad_;
};

// Thin wrappers over Tape::Apply; all inputs must live on the same tape.
Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Scale(Var x, double factor);
Var Relu(Var x);
Var Gelu(Var x);
Var LayerNorm(Var x, Var gain, Var bias, double epsilon = 1e-5);
Var SoftmaxRows(Var x, std::shared_ptr<const std::vector<uint8_t>> mask = nullptr);
Var LogSoftmaxRows(Var x);
Var MseReduce(Var a, Var b);
Var Transpose(Var x);
Var Slice(Var x, int axis, int begin, int end);
Var Concat(std::span<const Var> parts, int axis);
Var EmbedLookup(Var table, std::vector<int> indices);
Var AddBias(Var x, Var bias);
// x: [T x C_in]; weight: [kernel*C_in x C_out], row k*C_in + c. Output frame
// t reads input rows t*stride + stride - kernel + shift + k, k < kernel, with
// zeros outside [0, T); T_out = floor(T / stride). shift = 0 is causal.
Var Conv1d(Var x, Var weight, int stride, int kernel, int shift);
Var GroupNorm(Var x, Var gain, Var bias, int groups, double epsilon = 1e-5);
Var ExternalLoss(Var x, double value, Tensor grad);

}  // namespace seqdistill

#endif  // SEQDISTILL_AUTODIFF_TAPE_H_
