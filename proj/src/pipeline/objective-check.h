// src/pipeline/objective-check.h

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

#ifndef SEQDISTILL_PIPELINE_OBJECTIVE_CHECK_H_
#define SEQDISTILL_PIPELINE_OBJECTIVE_CHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "base/random.h"
#include "fst/wfst.h"

namespace seqdistill {

struct MmiInstance {
  Wfst numerator;
  Wfst denominator;
  Tensor loglikes;
};

// Small random LF-MMI problem: a phone n-gram denominator over a three-word
// lexicon and a numerator made of its own n-best paths, so every numerator
// path is also a denominator path.
MmiInstance RandomMmiInstance(Rng* rng);

struct ObjectiveCheck {
  std::string name;
  int instances = 0;
  double max_rel_error = 0.0;  // |analytic - numeric| / max(1, |analytic|)
};

struct ObjectiveCheckReport {
  std::vector<ObjectiveCheck> checks;
  // The MMI gradient equals numerator minus denominator occupancies bitwise
  // on every instance.
  bool occupancy_identity = true;
  double MaxRelError() const;
  bool Passed(double tolerance) const { return occupancy_identity && MaxRelError() <= tolerance; }
};

// Central finite differences with step `epsilon` for the MMI objective,
// hidden loss, prediction loss and total loss, `seeds` random instances
// each, derived from `base_seed`.
ObjectiveCheckReport CheckObjectiveGradients(int seeds, double epsilon, uint64_t base_seed = 1);

}  // namespace seqdistill

#endif  // SEQDISTILL_PIPELINE_OBJECTIVE_CHECK_H_
