// src/fst/forward-backward.cc

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

#include "fst/forward-backward.h"

#include <cmath>
#include <vector>

#include "base/error.h"
#include "base/log-math.h"

namespace seqdistill {

void CheckGraphAndLoglikes(const Wfst& graph, const Tensor& loglikes) {
  if (loglikes.NumDims() != 2 || loglikes.Rows() < 1)
    SEQDISTILL_THROW(ShapeError, "loglikes must be [T x m] with T >= 1, got "
                                     << loglikes.ShapeString());
  graph.Validate();
  const int m = loglikes.Cols();
  for (const Arc& a : graph.Arcs()) {
    if (a.ilabel == kEpsilon)
      SEQDISTILL_THROW(std::invalid_argument, "arc " << a.src << "->" << a.dst
                                                     << " has an epsilon input label");
    if (a.ilabel > m)
      SEQDISTILL_THROW(std::invalid_argument, "arc ilabel " << a.ilabel << " exceeds " << m
                                                            << " loglike columns");
  }
  if (!loglikes.AllFinite()) throw std::invalid_argument("loglikes contain non-finite values");
}

ForwardBackwardResult ForwardBackward(const Wfst& graph, const Tensor& loglikes) {
  CheckGraphAndLoglikes(graph, loglikes);
  const int T = loglikes.Rows();
  const int m = loglikes.Cols();
  const int S = graph.NumStates();
  if (S == 0) throw EmptyCompositionError("empty composition: graph has no states");
  const auto& arcs = graph.Arcs();

  // alpha[t][s]: log-sum of paths from the start consuming t frames.
  std::vector<std::vector<double>> alpha(T + 1, std::vector<double>(S, kLogZero));
  alpha[0][graph.Start()] = 0.0;
  for (int t = 0; t < T; ++t) {
    const double* ll = loglikes.Ptr() + static_cast<size_t>(t) * m;
    const auto& cur = alpha[t];
    auto& next = alpha[t + 1];
    for (const Arc& a : arcs) {
      if (cur[a.src] == kLogZero) continue;
      next[a.dst] = LogAdd(next[a.dst], cur[a.src] + a.weight + ll[PdfColumn(a.ilabel)]);
    }
  }
  double log_z = kLogZero;
  for (const auto& [s, w] : graph.Finals()) log_z = LogAdd(log_z, alpha[T][s] + w);
  if (log_z == kLogZero)
    SEQDISTILL_THROW(EmptyCompositionError, "empty composition: no accepting path of "
                                                << T << " frames");

  std::vector<double> beta(S, kLogZero), prev_beta(S);
  for (const auto& [s, w] : graph.Finals()) beta[s] = w;
  ForwardBackwardResult result;
  result.log_z = log_z;
  result.occupancies = Tensor::Zeros({T, m});
  for (int t = T - 1; t >= 0; --t) {
    const double* ll = loglikes.Ptr() + static_cast<size_t>(t) * m;
    double* occ = result.occupancies.MutablePtr() + static_cast<size_t>(t) * m;
    const auto& a_t = alpha[t];
    std::fill(prev_beta.begin(), prev_beta.end(), kLogZero);
    for (const Arc& a : arcs) {
      if (beta[a.dst] == kLogZero) continue;
      double through = a.weight + ll[PdfColumn(a.ilabel)] + beta[a.dst];
      prev_beta[a.src] = LogAdd(prev_beta[a.src], through);
      if (a_t[a.src] != kLogZero) occ[PdfColumn(a.ilabel)] += std::exp(a_t[a.src] + through - log_z);
    }
    beta.swap(prev_beta);
  }
  return result;
}

namespace {

struct Enumerator {
  const Wfst& graph;
  const Tensor& loglikes;
  std::vector<std::vector<int>> out;
  size_t max_paths;
  std::vector<double> scores;

  void Visit(StateId s, int t, double score) {
    if (t == loglikes.Rows()) {
      if (graph.IsFinal(s)) {
        if (scores.size() >= max_paths)
          SEQDISTILL_THROW(std::runtime_error, "brute force: more than " << max_paths << " paths");
        scores.push_back(score + graph.FinalWeight(s));
      }
      return;
    }
    for (int i : out[s]) {
      const Arc& a = graph.Arcs()[i];
      Visit(a.dst, t + 1, score + a.weight + loglikes(t, PdfColumn(a.ilabel)));
    }
  }
};

}  // namespace

double BruteForceLogZ(const Wfst& graph, const Tensor& loglikes, size_t max_paths) {
  CheckGraphAndLoglikes(graph, loglikes);
  if (graph.NumStates() == 0) throw EmptyCompositionError("empty composition: no states");
  Enumerator e{graph, loglikes, graph.OutArcs(), max_paths, {}};
  e.Visit(graph.Start(), 0, 0.0);
  if (e.scores.empty()) throw EmptyCompositionError("empty composition: no accepting path");
  return LogSumExp(e.scores);
}

}  // namespace seqdistill
