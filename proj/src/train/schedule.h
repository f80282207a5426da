// src/train/schedule.h

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

#ifndef SEQDISTILL_TRAIN_SCHEDULE_H_
#define SEQDISTILL_TRAIN_SCHEDULE_H_

#include <span>
#include <vector>

#include "autodiff/tensor.h"

namespace seqdistill {

/// Warmup / hold / linear-decay learning rate over total_steps updates.
struct TriStateSchedule {
  double peak_lr = 5e-4;
  int total_steps = 1;
  double warmup_frac = 0.10;
  double hold_frac = 0.40;
  double final_scale = 0.05;
  void Validate() const;
};

// Linear 0 -> peak over the first warmup_frac of steps, peak through
// warmup_frac + hold_frac, then linear down to final_scale * peak at
// total_steps. Throws std::out_of_range outside [0, total_steps].
double LrAt(int step, const TriStateSchedule& schedule);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
};

/// Adam with bias correction over a fixed list of parameter tensors.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, const AdamOptions& opts = {});
  // grads[i] matches params[i] in shape.
  void Step(std::span<const Tensor> grads, double lr);
  int Steps() const { return t_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor> m_, v_;
  AdamOptions opts_;
  int t_ = 0;
};

}  // namespace seqdistill

#endif  // SEQDISTILL_TRAIN_SCHEDULE_H_
