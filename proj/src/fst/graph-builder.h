// src/fst/graph-builder.h

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

#ifndef SEQDISTILL_FST_GRAPH_BUILDER_H_
#define SEQDISTILL_FST_GRAPH_BUILDER_H_

#include <cstdint>
#include <vector>

#include "base/random.h"
#include "fst/lexicon.h"
#include "fst/wfst.h"

namespace seqdistill {

// Realizes a word sequence as phones: per word, a silence with probability
// p_sil then one pronunciation drawn uniformly; one more silence draw after
// the last word. The draw order is fixed (silence, pronunciation) so outputs
// are reproducible from the seed.
std::vector<int> PhonesFromText(const std::vector<int>& sentence, const Lexicon& lexicon,
                                Rng* rng, double p_sil);

struct DenominatorOptions {
  int ngram_order = 2;
  int num_samples_per_sentence = 1;
  double p_sil = 0.2;
  // Probability mass shared uniformly by phones never seen after a context.
  double backoff_mass = 0.1;
  uint64_t seed = 0;
};

inline constexpr int kMaxNgramOrder = 4;

// Phone n-gram acceptor estimated on phone strings sampled from `corpus`.
// States are the last max(order-1, 1) phones; every non-start state carries
// the self-loop of its last phone and is final with weight 0.
Wfst BuildDenominatorGraph(const std::vector<std::vector<int>>& corpus, const Lexicon& lexicon,
                           const HmmTopology& topology, const DenominatorOptions& opts);

// Acceptor of every pdf-id sequence realizing `words`: any pronunciation,
// optional silence at each boundary, topology self-loops. All weights are 0
// and the word id is emitted on the arc that enters a word's first phone.
Wfst NumeratorFromTranscript(const std::vector<int>& words, const Lexicon& lexicon,
                             const HmmTopology& topology, bool allow_optional_silence);

struct DecodingGraphOptions {
  double p_sil = 0.2;
  double backoff_mass = 0.1;
};

// Word-bigram decoding graph with word output labels. Unseen successors of
// a word (including the sentence end) share `backoff_mass`; pronunciations
// of a word are equally likely; silence between words has probability p_sil.
Wfst BuildDecodingGraph(const std::vector<std::vector<int>>& corpus, const Lexicon& lexicon,
                        const HmmTopology& topology, const DecodingGraphOptions& opts);

}  // namespace seqdistill

#endif  // SEQDISTILL_FST_GRAPH_BUILDER_H_
