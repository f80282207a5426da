// src/pipeline/objective-check.cc

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

#include "pipeline/objective-check.h"

#include <algorithm>
#include <cmath>

#include "autodiff/grad-check.h"
#include "fst/decoder.h"
#include "fst/forward-backward.h"
#include "fst/graph-builder.h"
#include "lfmmi/distill-loss.h"

namespace seqdistill {

namespace {

Tensor RandomMatrix(Rng* rng, int rows, int cols, double lo, double hi) {
  Tensor t({rows, cols});
  for (size_t i = 0; i < t.Size(); ++i) t[i] = rng->Uniform(lo, hi);
  return t;
}

double RelError(double analytic, double numeric) {
  return std::fabs(analytic - numeric) / std::max(1.0, std::fabs(analytic));
}

// Teacher hiddens, student hiddens and projections for a two-pair map.
struct HiddenInstance {
  LayerMap map;
  std::vector<Tensor> teacher;
  std::vector<Tensor> params;  // student hiddens then projections
};

HiddenInstance RandomHiddenInstance(Rng* rng, int frames) {
  const int ds = rng->UniformInt(2, 4), dt = rng->UniformInt(2, 5);
  HiddenInstance h;
  h.map = DefaultLayerMap(2, 4, {});
  for (int b = 0; b < 4; ++b) h.teacher.push_back(RandomMatrix(rng, frames, dt, -1.0, 1.0));
  for (int i = 0; i < 2; ++i) h.params.push_back(RandomMatrix(rng, frames, ds, -1.0, 1.0));
  for (int i = 0; i < 2; ++i) h.params.push_back(RandomMatrix(rng, ds, dt, -1.0, 1.0));
  return h;
}

Var HiddenTerm(const HiddenInstance& h, std::span<const Var> p) {
  std::vector<Var> student = {p[0], p[1]};
  std::vector<Var> proj = {p[2], p[3]};
  return HiddenLoss(student, h.teacher, h.map, proj);
}

PredictionLossOptions RandomPredictionOptions(Rng* rng) {
  PredictionLossOptions o;
  o.beta = rng->Uniform();
  o.normalize_mmi_by_frames = rng->Bernoulli(0.5);
  o.mse_on_log_softmax = rng->Bernoulli(0.5);
  return o;
}

}  // namespace

MmiInstance RandomMmiInstance(Rng* rng) {
  Lexicon lex;
  const int a = lex.AddPhone("A"), b = lex.AddPhone("B"), c = lex.AddPhone("C");
  lex.AddPronunciation(lex.AddWord("x"), {a});
  lex.AddPronunciation(lex.AddWord("y"), {b, c});
  const int z = lex.AddWord("z");
  lex.AddPronunciation(z, {c});
  lex.AddPronunciation(z, {a, b});
  HmmTopology topo(lex.NumPhones());
  std::vector<std::vector<int>> corpus;
  for (int s = 0; s < 4; ++s) {
    std::vector<int> sentence;
    const int len = rng->UniformInt(1, 3);
    for (int i = 0; i < len; ++i) sentence.push_back(rng->UniformInt(1, 3));
    corpus.push_back(sentence);
  }
  DenominatorOptions opts;
  opts.seed = rng->NextU64();
  opts.ngram_order = rng->UniformInt(1, 3);
  MmiInstance inst;
  inst.denominator = BuildDenominatorGraph(corpus, lex, topo, opts);
  inst.loglikes = RandomMatrix(rng, rng->UniformInt(2, 7), lex.NumPhones(), -3.0, 0.0);
  inst.numerator =
      NumeratorFromLattice(DecodeNbest(inst.denominator, inst.loglikes, 3), false);
  return inst;
}

double ObjectiveCheckReport::MaxRelError() const {
  double m = 0.0;
  for (const ObjectiveCheck& c : checks) m = std::max(m, c.max_rel_error);
  return m;
}

ObjectiveCheckReport CheckObjectiveGradients(int seeds, double epsilon, uint64_t base_seed) {
  if (seeds < 1) throw std::invalid_argument("gradient check needs at least one seed");
  if (!(epsilon > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  ObjectiveCheckReport report;
  ObjectiveCheck mmi{"mmi_objective"}, hidden{"hidden_loss"}, pred{"prediction_loss"},
      total{"total_loss"};
  for (int s = 0; s < seeds; ++s) {
    Rng rng(DeriveSeed(base_seed, s));
    MmiInstance inst = RandomMmiInstance(&rng);
    const Wfst& num = inst.numerator;
    const Wfst& den = inst.denominator;

    // MMI objective against its value directly.
    MmiResult r = MmiObjective(inst.loglikes, num, den);
    Tensor occ = ForwardBackward(num, inst.loglikes).occupancies;
    occ.AddInPlace(ForwardBackward(den, inst.loglikes).occupancies, -1.0);
    report.occupancy_identity = report.occupancy_identity && occ.BitwiseEqual(r.grad);
    for (size_t i = 0; i < inst.loglikes.Size(); ++i) {
      Tensor plus = inst.loglikes, minus = inst.loglikes;
      plus[i] += epsilon;
      minus[i] -= epsilon;
      const double fd = (MmiObjective(plus, num, den).value -
                         MmiObjective(minus, num, den).value) / (2.0 * epsilon);
      mmi.max_rel_error = std::max(mmi.max_rel_error, RelError(r.grad[i], fd));
    }
    ++mmi.instances;

    const int frames = inst.loglikes.Rows(), pdfs = inst.loglikes.Cols();
    HiddenInstance h = RandomHiddenInstance(&rng, frames);
    auto hidden_fn = [&](Tape&, std::span<const Var> p) { return HiddenTerm(h, p); };
    hidden.max_rel_error =
        std::max(hidden.max_rel_error, GradCheck(hidden_fn, h.params, epsilon));
    ++hidden.instances;

    const Tensor teacher_out = RandomMatrix(&rng, frames, pdfs, -3.0, 0.0);
    const std::vector<Tensor> student_out = {RandomMatrix(&rng, frames, pdfs, -3.0, 0.0)};
    const PredictionLossOptions popts = RandomPredictionOptions(&rng);
    auto pred_fn = [&](Tape&, std::span<const Var> p) {
      return PredictionLoss(p[0], teacher_out, num, den, popts);
    };
    pred.max_rel_error = std::max(pred.max_rel_error, GradCheck(pred_fn, student_out, epsilon));
    ++pred.instances;

    const double alpha = rng.Uniform();
    std::vector<Tensor> all = h.params;
    all.push_back(student_out[0]);
    auto total_fn = [&](Tape&, std::span<const Var> p) {
      return TotalLoss(HiddenTerm(h, p), PredictionLoss(p[4], teacher_out, num, den, popts),
                       alpha);
    };
    total.max_rel_error = std::max(total.max_rel_error, GradCheck(total_fn, all, epsilon));
    ++total.instances;
  }
  report.checks = {mmi, hidden, pred, total};
  return report;
}

}  // namespace seqdistill
