// src/autodiff/grad-check.h

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

#ifndef SEQDISTILL_AUTODIFF_GRAD_CHECK_H_
#define SEQDISTILL_AUTODIFF_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "autodiff/tape.h"

namespace seqdistill {

// Builds a scalar on `tape` from the parameter handles, in order.
using ScalarFunction = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  int worst_param = -1;
  size_t worst_entry = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares reverse-mode gradients of `fn` with central differences of
// step `epsilon`. Error per entry is |analytic - numeric| / max(1, |analytic|).
// Throws if two evaluations at the same point disagree.
GradCheckResult GradCheckDetailed(const ScalarFunction& fn, std::span<const Tensor> params,
                                  double epsilon);

double GradCheck(const ScalarFunction& fn, std::span<const Tensor> params, double epsilon);

}  // namespace seqdistill

#endif  // SEQDISTILL_AUTODIFF_GRAD_CHECK_H_
