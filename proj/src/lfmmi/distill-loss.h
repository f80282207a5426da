// src/lfmmi/distill-loss.h

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

#ifndef SEQDISTILL_LFMMI_DISTILL_LOSS_H_
#define SEQDISTILL_LFMMI_DISTILL_LOSS_H_

#include <set>
#include <span>
#include <vector>

#include "autodiff/tape.h"
#include "base/random.h"
#include "fst/wfst.h"

namespace seqdistill {

struct ObjectiveWeights {
  double alpha = 0.8;  // weight of the prediction-layer loss against hidden MSE
  double beta = 0.8;   // weight of MMI against output MSE inside the prediction loss
  void Validate() const;
};

// Student layer i (1-based block index) learns teacher layer `teacher`.
struct LayerPair {
  int student;
  int teacher;
};

struct LayerMap {
  std::vector<LayerPair> pairs;
  // Throws std::invalid_argument unless student indices increase strictly
  // and every index lies within the given depths.
  void Validate(int student_blocks, int teacher_blocks) const;
};

// Pairs (i, 2i) for i = 1..student_blocks, excluding `skip`. With `compact`
// the surviving pairs are renumbered 1..N on the student side, which is how a
// shallower student inherits the mapping of a deeper one with layers removed:
// DefaultLayerMap(12, 24, {4, 8}, true) maps a 10-block student to teacher
// layers {2, 4, 6, 10, 12, 14, 18, 20, 22, 24}.
LayerMap DefaultLayerMap(int student_blocks, int teacher_blocks, const std::set<int>& skip,
                         bool compact = false);

// One [d_student x d_teacher] projection per pair, uniform in
// +-1/sqrt(d_student).
std::vector<Tensor> InitProjections(const LayerMap& map, int d_student, int d_teacher, Rng* rng);

// Sum over pairs of MSE(H^S_i W_i, H^T_g(i)). Hidden lists are indexed by
// block (entry 0 is block 1). Teacher hiddens are constants.
Var HiddenLoss(std::span<const Var> student_hiddens, std::span<const Tensor> teacher_hiddens,
               const LayerMap& map, std::span<const Var> projections);

struct MmiResult {
  double value = 0.0;  // logZ(numerator) - logZ(denominator)
  Tensor grad;         // d value / d loglikes
};

// Throws SupervisionMismatchError when the numerator accepts no path of
// loglikes.Rows() frames, EmptyCompositionError for the denominator.
MmiResult MmiObjective(const Tensor& loglikes, const Wfst& numerator, const Wfst& denominator);

struct PredictionLossOptions {
  double beta = 0.8;
  // Divide the MMI term by the number of frames.
  bool normalize_mmi_by_frames = false;
  // Compare log-softmax outputs instead of raw outputs in the MSE term.
  bool mse_on_log_softmax = false;
};

// beta * (-MMI) + (1 - beta) * MSE(O^S, O^T). The MMI term is spliced into
// the tape through its analytic gradient; terms with zero weight are not
// evaluated.
Var PredictionLoss(Var student_out, const Tensor& teacher_out, const Wfst& numerator,
                   const Wfst& denominator, const PredictionLossOptions& opts);

// Negated MMI with its gradient, optionally per frame; the loss used to train
// the teacher on transcripts.
Var MmiLoss(Var loglikes, const Wfst& numerator, const Wfst& denominator,
            bool normalize_by_frames);

// (1 - alpha) * hidden + alpha * pred; an invalid Var may be passed for a
// term whose weight is zero.
Var TotalLoss(Var hidden, Var pred, double alpha);

}  // namespace seqdistill

#endif  // SEQDISTILL_LFMMI_DISTILL_LOSS_H_
