// src/train/wer.h

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

#ifndef SEQDISTILL_TRAIN_WER_H_
#define SEQDISTILL_TRAIN_WER_H_

#include <vector>

namespace seqdistill {

struct EditCounts {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_words = 0;
  int Errors() const { return substitutions + deletions + insertions; }
};

// Levenshtein alignment of word ids. Among minimal alignments, prefers
// substitutions, then deletions, then insertions when backtracking.
EditCounts AlignWords(const std::vector<int>& ref, const std::vector<int>& hyp);

/// Micro-averaged word error rate: summed errors over summed reference words.
class WerAccumulator {
 public:
  void Add(const std::vector<int>& ref, const std::vector<int>& hyp);
  const EditCounts& Totals() const { return totals_; }
  int Sentences() const { return sentences_; }
  // Sentences whose hypothesis equals the reference.
  int ExactSentences() const { return exact_; }
  // Throws std::logic_error with no reference words.
  double Wer() const;

 private:
  EditCounts totals_;
  int sentences_ = 0;
  int exact_ = 0;
};

}  // namespace seqdistill

#endif  // SEQDISTILL_TRAIN_WER_H_
