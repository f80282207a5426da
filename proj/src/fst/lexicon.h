// src/fst/lexicon.h

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

#ifndef SEQDISTILL_FST_LEXICON_H_
#define SEQDISTILL_FST_LEXICON_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fst/wfst.h"

namespace seqdistill {

/// Word and phone symbol tables plus pronunciations. Phone 1 is always the
/// silence phone "<sil>"; lexical phones follow densely from 2. Word ids
/// start at 1 so that 0 stays free for epsilon output labels.
class Lexicon {
 public:
  static constexpr int kSilencePhone = 1;
  static constexpr const char* kSilenceName = "<sil>";

  Lexicon();

  // Returns the id of `name`, registering it if unseen.
  int AddPhone(const std::string& name);
  int AddWord(const std::string& name);
  void AddPronunciation(int word, const std::vector<int>& phones);

  // Number of phones including silence; phone ids are [1, NumPhones()].
  int NumPhones() const { return static_cast<int>(phone_names_.size()) - 1; }
  int NumWords() const { return static_cast<int>(word_names_.size()) - 1; }
  int SilencePhone() const { return kSilencePhone; }

  // -1 when the symbol is unknown.
  int PhoneId(const std::string& name) const;
  int WordId(const std::string& name) const;
  const std::string& PhoneName(int phone) const;
  const std::string& WordName(int word) const;
  const std::vector<std::vector<int>>& Pronunciations(int word) const;

  // Maps words to ids; throws std::invalid_argument naming the first
  // out-of-vocabulary word.
  std::vector<int> WordsToIds(const std::vector<std::string>& words) const;
  // Throws std::invalid_argument naming an id outside [1, NumWords()].
  void CheckWordIds(const std::vector<int>& words) const;

  // One line per pronunciation: "WORD PHONE1 PHONE2 ...". Reading assigns
  // lexical phone ids in sorted name order and word ids by first appearance.
  void Write(std::ostream& os) const;
  static Lexicon Read(std::istream& is);
  void WriteFile(const std::string& path) const;
  static Lexicon ReadFile(const std::string& path);

 private:
  std::vector<std::string> phone_names_;  // index 0 unused
  std::vector<std::string> word_names_;   // index 0 unused
  std::map<std::string, int> phone_ids_;
  std::map<std::string, int> word_ids_;
  std::vector<std::vector<std::vector<int>>> prons_;  // by word id
};

/// One emitting state per phone with a self-loop; pdf-id(phone) = phone.
/// Topology arcs carry weight 0.
class HmmTopology {
 public:
  explicit HmmTopology(int num_phones) : num_phones_(num_phones) {}

  int NumPdfs() const { return num_phones_; }
  Label PdfForPhone(int phone) const;

  // Adds the state for `phone` entered from `src` by a forward arc with the
  // given olabel and weight, plus its zero-weight self-loop. Returns it.
  StateId AppendPhone(Wfst* fst, StateId src, int phone, Label olabel, double weight) const;

 private:
  int num_phones_;
};

// Reads one whitespace-tokenized sentence per line; empty lines are skipped.
std::vector<std::vector<std::string>> ReadCorpus(std::istream& is);
std::vector<std::vector<std::string>> ReadCorpusFile(const std::string& path);

}  // namespace seqdistill

#endif  // SEQDISTILL_FST_LEXICON_H_
