// src/fst/decoder.cc

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

#include "fst/decoder.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "base/error.h"
#include "base/log-math.h"
#include "fst/forward-backward.h"

namespace seqdistill {

std::vector<int> LatticePath::Words() const {
  std::vector<int> words;
  for (Label o : olabels)
    if (o != kEpsilon) words.push_back(o);
  return words;
}

double PathScore(const LatticePath& path, bool include_acoustic) {
  double sum = 0.0;
  for (size_t t = 0; t < path.graph_weights.size(); ++t)
    sum += include_acoustic ? path.graph_weights[t] + path.acoustic_weights[t]
                            : path.graph_weights[t];
  return sum + path.final_weight;
}

Lattice::Lattice(int num_frames, std::vector<LatticePath> paths)
    : num_frames_(num_frames), paths_(std::move(paths)) {
  for (const LatticePath& p : paths_)
    if (static_cast<int>(p.pdfs.size()) != num_frames_ ||
        p.olabels.size() != p.pdfs.size() || p.graph_weights.size() != p.pdfs.size() ||
        p.acoustic_weights.size() != p.pdfs.size())
      SEQDISTILL_THROW(std::invalid_argument, "lattice path does not have " << num_frames_
                                                                            << " frames");
}

const LatticePath& Lattice::Best() const {
  if (paths_.empty()) throw std::invalid_argument("empty lattice");
  return paths_.front();
}

double Lattice::LogZ() const {
  std::vector<double> scores;
  for (const LatticePath& p : paths_) scores.push_back(p.score);
  return LogSumExp(scores);
}

void Lattice::Write(std::ostream& os) const {
  os << num_frames_ << ' ' << paths_.size() << '\n';
  for (const LatticePath& p : paths_) {
    os << FormatDouble(p.final_weight) << '\n';
    for (int t = 0; t < num_frames_; ++t)
      os << p.pdfs[t] << ' ' << p.olabels[t] << ' ' << FormatDouble(p.graph_weights[t]) << ' '
         << FormatDouble(p.acoustic_weights[t]) << '\n';
  }
}

Lattice Lattice::Read(std::istream& is) {
  int frames = 0;
  size_t num_paths = 0;
  if (!(is >> frames >> num_paths) || frames < 0)
    throw std::invalid_argument("lattice text: bad header");
  std::vector<LatticePath> paths(num_paths);
  std::string a, b;
  for (LatticePath& p : paths) {
    if (!(is >> a)) throw std::invalid_argument("lattice text: truncated");
    p.final_weight = ParseDouble(a);
    for (int t = 0; t < frames; ++t) {
      Label pdf, olabel;
      if (!(is >> pdf >> olabel >> a >> b)) throw std::invalid_argument("lattice text: truncated");
      p.pdfs.push_back(pdf);
      p.olabels.push_back(olabel);
      p.graph_weights.push_back(ParseDouble(a));
      p.acoustic_weights.push_back(ParseDouble(b));
    }
    p.score = PathScore(p, true);
  }
  return Lattice(frames, std::move(paths));
}

namespace {

// Partial hypothesis ending in some state after t frames.
struct Token {
  double score;
  int arc;        // arc consumed at frame t-1, -1 at t=0
  int prev_rank;  // rank of the predecessor token in the source state
};

bool Better(const Token& a, const Token& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.arc != b.arc) return a.arc < b.arc;
  return a.prev_rank < b.prev_rank;
}

}  // namespace

Lattice DecodeNbest(const Wfst& graph, const Tensor& loglikes, int n, double beam) {
  if (n < 1) SEQDISTILL_THROW(std::invalid_argument, "n-best size " << n << " must be >= 1");
  if (!(beam > 0.0)) throw std::invalid_argument("beam must be positive");
  CheckGraphAndLoglikes(graph, loglikes);
  const int T = loglikes.Rows();
  const int m = loglikes.Cols();
  const int S = graph.NumStates();
  if (S == 0) throw EmptyCompositionError("empty composition: graph has no states");
  const auto& arcs = graph.Arcs();

  // tokens[t][s] holds up to n best partial paths, best first.
  std::vector<std::vector<std::vector<Token>>> tokens(T + 1,
                                                      std::vector<std::vector<Token>>(S));
  tokens[0][graph.Start()].push_back({0.0, -1, -1});
  std::vector<std::vector<Token>> cand(S);
  for (int t = 0; t < T; ++t) {
    const double* ll = loglikes.Ptr() + static_cast<size_t>(t) * m;
    for (auto& c : cand) c.clear();
    for (size_t i = 0; i < arcs.size(); ++i) {
      const Arc& a = arcs[i];
      const auto& src = tokens[t][a.src];
      if (src.empty()) continue;
      double add = a.weight + ll[PdfColumn(a.ilabel)];
      for (size_t r = 0; r < src.size(); ++r)
        cand[a.dst].push_back({src[r].score + add, static_cast<int>(i), static_cast<int>(r)});
    }
    for (int s = 0; s < S; ++s) {
      auto& c = cand[s];
      if (static_cast<int>(c.size()) > n) {
        std::nth_element(c.begin(), c.begin() + n, c.end(), Better);
        c.resize(n);
      }
      std::sort(c.begin(), c.end(), Better);
      tokens[t + 1][s] = c;
    }
  }

  struct Ending {
    double score;
    int arc;
    StateId state;
    int rank;
  };
  std::vector<Ending> endings;
  for (const auto& [s, w] : graph.Finals())
    for (size_t r = 0; r < tokens[T][s].size(); ++r)
      endings.push_back({tokens[T][s][r].score + w, tokens[T][s][r].arc, s, static_cast<int>(r)});
  if (endings.empty())
    SEQDISTILL_THROW(EmptyCompositionError, "empty composition: no accepting path of "
                                                << T << " frames");
  std::sort(endings.begin(), endings.end(), [](const Ending& a, const Ending& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.arc != b.arc) return a.arc < b.arc;
    if (a.state != b.state) return a.state < b.state;
    return a.rank < b.rank;
  });

  std::vector<LatticePath> paths;
  const double best = endings.front().score;
  for (const Ending& e : endings) {
    if (static_cast<int>(paths.size()) == n) break;
    if (best - e.score > beam) break;
    LatticePath p;
    p.pdfs.resize(T);
    p.olabels.resize(T);
    p.graph_weights.resize(T);
    p.acoustic_weights.resize(T);
    p.final_weight = graph.FinalWeight(e.state);
    StateId s = e.state;
    int rank = e.rank;
    for (int t = T; t > 0; --t) {
      const Token& tok = tokens[t][s][rank];
      const Arc& a = arcs[tok.arc];
      p.pdfs[t - 1] = a.ilabel;
      p.olabels[t - 1] = a.olabel;
      p.graph_weights[t - 1] = a.weight;
      p.acoustic_weights[t - 1] = loglikes(t - 1, PdfColumn(a.ilabel));
      s = a.src;
      rank = tok.prev_rank;
    }
    p.score = PathScore(p, true);
    paths.push_back(std::move(p));
  }
  return Lattice(T, std::move(paths));
}

ViterbiResult ViterbiDecode(const Wfst& graph, const Tensor& loglikes) {
  Lattice lat = DecodeNbest(graph, loglikes, 1);
  return {lat.Best().Words(), lat.Best().score};
}

Wfst NumeratorFromLattice(const Lattice& lattice, bool include_acoustic) {
  if (lattice.Empty()) throw std::invalid_argument("numerator from lattice: empty lattice");
  if (lattice.NumFrames() < 1) throw std::invalid_argument("numerator from lattice: no frames");
  Wfst fst;
  fst.AddState();
  for (const LatticePath& p : lattice.Paths()) {
    StateId s = fst.Start();
    for (int t = 0; t < lattice.NumFrames(); ++t) {
      StateId d = fst.AddState();
      double w = include_acoustic ? p.graph_weights[t] + p.acoustic_weights[t]
                                  : p.graph_weights[t];
      fst.AddArc(s, d, p.pdfs[t], p.olabels[t], w);
      s = d;
    }
    fst.SetFinal(s, p.final_weight);
  }
  return fst;
}

}  // namespace seqdistill
