// src/fst/decoder.h

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

#ifndef SEQDISTILL_FST_DECODER_H_
#define SEQDISTILL_FST_DECODER_H_

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "fst/wfst.h"

namespace seqdistill {

// One decoded hypothesis; per-frame vectors have T entries.
struct LatticePath {
  std::vector<Label> pdfs;
  std::vector<Label> olabels;
  std::vector<double> graph_weights;
  std::vector<double> acoustic_weights;
  double final_weight = 0.0;
  // Sum over frames of (graph + acoustic), in frame order, then + final.
  double score = 0.0;

  std::vector<int> Words() const;
};

/// N-best hypotheses of one utterance, best first.
class Lattice {
 public:
  Lattice() = default;
  Lattice(int num_frames, std::vector<LatticePath> paths);

  int NumFrames() const { return num_frames_; }
  int NumPaths() const { return static_cast<int>(paths_.size()); }
  bool Empty() const { return paths_.empty(); }
  const std::vector<LatticePath>& Paths() const { return paths_; }
  const LatticePath& Best() const;
  double LogZ() const;

  // Text form: header "T num_paths", then per path a line
  // "final_weight" followed by T lines "pdf olabel graph_w acoustic_w".
  void Write(std::ostream& os) const;
  static Lattice Read(std::istream& is);

 private:
  int num_frames_ = 0;
  std::vector<LatticePath> paths_;
};

// Recomputes LatticePath::score from its components.
double PathScore(const LatticePath& path, bool include_acoustic);

// Top-n distinct accepting paths within `beam` of the best. Candidates with
// equal score are ranked by the lower index of their last arc.
Lattice DecodeNbest(const Wfst& graph, const Tensor& loglikes, int n,
                    double beam = std::numeric_limits<double>::infinity());

struct ViterbiResult {
  std::vector<int> words;
  double score = 0.0;
};

ViterbiResult ViterbiDecode(const Wfst& graph, const Tensor& loglikes);

// Union of the lattice paths as linear chains leaving the start state. Arc
// weights are graph (+ acoustic when requested) weights, so each chain's
// weight sum equals its path score bitwise.
Wfst NumeratorFromLattice(const Lattice& lattice, bool include_acoustic = true);

}  // namespace seqdistill

#endif  // SEQDISTILL_FST_DECODER_H_
