// src/lfmmi/distill-loss.cc

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

#include "lfmmi/distill-loss.h"

#include <cmath>

#include "base/error.h"
#include "fst/forward-backward.h"

namespace seqdistill {

namespace {

void CheckUnit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    SEQDISTILL_THROW(std::invalid_argument, name << " = " << v << " outside [0, 1]");
}

}  // namespace

void ObjectiveWeights::Validate() const {
  CheckUnit(alpha, "alpha");
  CheckUnit(beta, "beta");
}

void LayerMap::Validate(int student_blocks, int teacher_blocks) const {
  int prev = 0;
  for (const LayerPair& p : pairs) {
    if (p.student <= prev)
      throw std::invalid_argument("layer map student indices must increase strictly");
    if (p.student > student_blocks)
      SEQDISTILL_THROW(std::invalid_argument, "layer map student layer " << p.student
                                                  << " exceeds " << student_blocks << " blocks");
    if (p.teacher < 1 || p.teacher > teacher_blocks)
      SEQDISTILL_THROW(std::invalid_argument, "layer map teacher layer " << p.teacher
                                                  << " outside 1.." << teacher_blocks);
    prev = p.student;
  }
}

LayerMap DefaultLayerMap(int student_blocks, int teacher_blocks, const std::set<int>& skip,
                         bool compact) {
  if (student_blocks < 1) throw std::invalid_argument("layer map needs a student block");
  LayerMap map;
  int next = 1;
  for (int i = 1; i <= student_blocks; ++i) {
    if (skip.count(i)) continue;
    if (2 * i > teacher_blocks)
      SEQDISTILL_THROW(std::invalid_argument, "layer map: student layer " << i << " maps to "
                                                  << 2 * i << " beyond teacher depth "
                                                  << teacher_blocks);
    map.pairs.push_back({compact ? next++ : i, 2 * i});
  }
  return map;
}

std::vector<Tensor> InitProjections(const LayerMap& map, int d_student, int d_teacher, Rng* rng) {
  std::vector<Tensor> out;
  double bound = 1.0 / std::sqrt(static_cast<double>(d_student));
  for (size_t k = 0; k < map.pairs.size(); ++k) {
    Tensor w = Tensor::Zeros({d_student, d_teacher});
    for (size_t i = 0; i < w.Size(); ++i) w[i] = rng->Uniform(-bound, bound);
    out.push_back(std::move(w));
  }
  return out;
}

Var HiddenLoss(std::span<const Var> student_hiddens, std::span<const Tensor> teacher_hiddens,
               const LayerMap& map, std::span<const Var> projections) {
  if (map.pairs.empty()) throw std::invalid_argument("hidden loss: empty layer map");
  if (projections.size() != map.pairs.size())
    SEQDISTILL_THROW(std::invalid_argument, "hidden loss: " << projections.size()
                                                << " projections for " << map.pairs.size()
                                                << " layer pairs");
  map.Validate(static_cast<int>(student_hiddens.size()), static_cast<int>(teacher_hiddens.size()));
  Var total;
  for (size_t k = 0; k < map.pairs.size(); ++k) {
    Var hs = student_hiddens[map.pairs[k].student - 1];
    const Tensor& ht = teacher_hiddens[map.pairs[k].teacher - 1];
    if (hs.value().Rows() != ht.Rows())
      SEQDISTILL_THROW(ShapeError, "hidden loss: student layer " << map.pairs[k].student
                                       << " has " << hs.value().Rows() << " frames, teacher layer "
                                       << map.pairs[k].teacher << " has " << ht.Rows());
    Tape* tape = hs.tape();
    Var mse = MseReduce(MatMul(hs, projections[k]), tape->Constant(ht));
    total = total.valid() ? Add(total, mse) : mse;
  }
  return total;
}

MmiResult MmiObjective(const Tensor& loglikes, const Wfst& numerator, const Wfst& denominator) {
  ForwardBackwardResult num;
  try {
    num = ForwardBackward(numerator, loglikes);
  } catch (const EmptyCompositionError& e) {
    SEQDISTILL_THROW(SupervisionMismatchError, "supervision mismatch: " << e.what());
  }
  ForwardBackwardResult den = ForwardBackward(denominator, loglikes);
  MmiResult r;
  r.value = num.log_z - den.log_z;
  r.grad = std::move(num.occupancies);
  r.grad.AddInPlace(den.occupancies, -1.0);
  return r;
}

Var MmiLoss(Var loglikes, const Wfst& numerator, const Wfst& denominator,
            bool normalize_by_frames) {
  MmiResult mmi = MmiObjective(loglikes.value(), numerator, denominator);
  double scale = normalize_by_frames ? 1.0 / loglikes.value().Rows() : 1.0;
  mmi.grad.ScaleInPlace(-scale);
  return ExternalLoss(loglikes, -scale * mmi.value, std::move(mmi.grad));
}

Var PredictionLoss(Var student_out, const Tensor& teacher_out, const Wfst& numerator,
                   const Wfst& denominator, const PredictionLossOptions& opts) {
  CheckUnit(opts.beta, "beta");
  if (!student_out.value().SameShape(teacher_out))
    SEQDISTILL_THROW(ShapeError, "prediction loss: student output "
                                     << student_out.value().ShapeString() << " vs teacher "
                                     << teacher_out.ShapeString());
  Var mmi_term, mse_term;
  if (opts.beta > 0.0)
    mmi_term = MmiLoss(student_out, numerator, denominator, opts.normalize_mmi_by_frames);
  if (opts.beta < 1.0) {
    Tape* tape = student_out.tape();
    if (opts.mse_on_log_softmax) {
      Tape scratch;
      Tensor teacher_logp = LogSoftmaxRows(scratch.Constant(teacher_out)).value();
      mse_term = MseReduce(LogSoftmaxRows(student_out), tape->Constant(teacher_logp));
    } else {
      mse_term = MseReduce(student_out, tape->Constant(teacher_out));
    }
  }
  if (!mse_term.valid()) return mmi_term;
  if (!mmi_term.valid()) return mse_term;
  return Add(Scale(mmi_term, opts.beta), Scale(mse_term, 1.0 - opts.beta));
}

Var TotalLoss(Var hidden, Var pred, double alpha) {
  CheckUnit(alpha, "alpha");
  if (alpha == 1.0) {
    if (!pred.valid()) throw std::invalid_argument("total loss: prediction term missing");
    return pred;
  }
  if (alpha == 0.0) {
    if (!hidden.valid()) throw std::invalid_argument("total loss: hidden term missing");
    return hidden;
  }
  if (!pred.valid() || !hidden.valid()) throw std::invalid_argument("total loss: term missing");
  return Add(Scale(hidden, 1.0 - alpha), Scale(pred, alpha));
}

}  // namespace seqdistill
