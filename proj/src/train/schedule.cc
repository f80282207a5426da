// src/train/schedule.cc

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

#include "train/schedule.h"

#include <cmath>

#include "base/error.h"

namespace seqdistill {

void TriStateSchedule::Validate() const {
  if (!(peak_lr > 0.0)) throw std::invalid_argument("schedule: peak_lr must be positive");
  if (total_steps < 1) throw std::invalid_argument("schedule: total_steps must be >= 1");
  if (!(warmup_frac > 0.0 && warmup_frac < 1.0) || !(hold_frac > 0.0 && hold_frac < 1.0) ||
      !(warmup_frac + hold_frac < 1.0))
    throw std::invalid_argument("schedule: fractions must lie in (0,1) with warmup + hold < 1");
  if (!(final_scale >= 0.0 && final_scale <= 1.0))
    throw std::invalid_argument("schedule: final_scale must be in [0,1]");
}

double LrAt(int step, const TriStateSchedule& s) {
  s.Validate();
  if (step < 0 || step > s.total_steps)
    SEQDISTILL_THROW(std::out_of_range, "lr step " << step << " outside [0, " << s.total_steps << "]");
  const double total = s.total_steps;
  const double warmup_end = s.warmup_frac * total;
  const double hold_end = (s.warmup_frac + s.hold_frac) * total;
  if (step <= warmup_end) return s.peak_lr * (step / warmup_end);
  if (step <= hold_end) return s.peak_lr;
  // Written so that the last step yields exactly final_scale * peak.
  double remaining = (total - step) / (total - hold_end);
  return s.peak_lr * (s.final_scale + (1.0 - s.final_scale) * remaining);
}

Adam::Adam(std::vector<Tensor*> params, const AdamOptions& opts)
    : params_(std::move(params)), opts_(opts) {
  for (Tensor* p : params_) {
    m_.push_back(Tensor::Zeros(p->Shape()));
    v_.push_back(Tensor::Zeros(p->Shape()));
  }
}

void Adam::Step(std::span<const Tensor> grads, double lr) {
  if (grads.size() != params_.size())
    SEQDISTILL_THROW(std::invalid_argument, "adam: " << grads.size() << " gradients for "
                                                     << params_.size() << " parameters");
  ++t_;
  const double b1 = opts_.beta1, b2 = opts_.beta2;
  const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
  for (size_t i = 0; i < params_.size(); ++i) {
    const Tensor& g = grads[i];
    if (!g.SameShape(*params_[i]))
      SEQDISTILL_THROW(ShapeError, "adam: gradient " << g.ShapeString() << " for parameter "
                                                     << params_[i]->ShapeString());
    double* p = params_[i]->MutablePtr();
    double* m = m_[i].MutablePtr();
    double* v = v_[i].MutablePtr();
    for (size_t j = 0; j < g.Size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + opts_.epsilon);
    }
  }
}

}  // namespace seqdistill
