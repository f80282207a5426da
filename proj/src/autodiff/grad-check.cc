// src/autodiff/grad-check.cc

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

#include "autodiff/grad-check.h"

#include <cmath>
#include <stdexcept>

#include "base/error.h"

namespace seqdistill {

namespace {

double Evaluate(const ScalarFunction& fn, std::span<const Tensor> params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const Tensor& p : params) vars.push_back(tape.Constant(p));
  return fn(tape, vars).value().Item();
}

}  // namespace

GradCheckResult GradCheckDetailed(const ScalarFunction& fn, std::span<const Tensor> params,
                                  double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be positive");

  Tape tape;
  std::vector<Var> vars;
  for (size_t i = 0; i < params.size(); ++i)
    vars.push_back(tape.Variable(params[i], static_cast<int>(i)));
  Var loss = fn(tape, vars);
  GradientMap analytic = tape.Backward(loss);

  double base1 = loss.value().Item();
  double base2 = Evaluate(fn, params);
  if (base1 != base2)
    SEQDISTILL_THROW(std::runtime_error, "grad_check: function is not deterministic ("
                                             << base1 << " vs " << base2 << ")");

  GradCheckResult result;
  std::vector<Tensor> probe(params.begin(), params.end());
  for (size_t p = 0; p < probe.size(); ++p) {
    const Tensor& grad = analytic.at(static_cast<int>(p));
    for (size_t i = 0; i < probe[p].Size(); ++i) {
      double saved = probe[p][i];
      probe[p][i] = saved + epsilon;
      double plus = Evaluate(fn, probe);
      probe[p][i] = saved - epsilon;
      double minus = Evaluate(fn, probe);
      probe[p][i] = saved;
      double numeric = (plus - minus) / (2.0 * epsilon);
      double err = std::fabs(grad[i] - numeric) / std::max(1.0, std::fabs(grad[i]));
      if (err > result.max_rel_error || result.worst_param < 0) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        result.worst_param = static_cast<int>(p);
        result.worst_entry = i;
        result.worst_analytic = grad[i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

double GradCheck(const ScalarFunction& fn, std::span<const Tensor> params, double epsilon) {
  return GradCheckDetailed(fn, params, epsilon).max_rel_error;
}

}  // namespace seqdistill
