// src/fst/lexicon.cc

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

#include "fst/lexicon.h"

#include <fstream>
#include <set>
#include <sstream>

#include "base/error.h"

namespace seqdistill {

Lexicon::Lexicon() : phone_names_{"", kSilenceName}, word_names_{""}, prons_(1) {
  phone_ids_[kSilenceName] = kSilencePhone;
}

int Lexicon::AddPhone(const std::string& name) {
  auto it = phone_ids_.find(name);
  if (it != phone_ids_.end()) return it->second;
  int id = static_cast<int>(phone_names_.size());
  phone_names_.push_back(name);
  phone_ids_[name] = id;
  return id;
}

int Lexicon::AddWord(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("empty word name");
  auto it = word_ids_.find(name);
  if (it != word_ids_.end()) return it->second;
  int id = static_cast<int>(word_names_.size());
  word_names_.push_back(name);
  word_ids_[name] = id;
  prons_.emplace_back();
  return id;
}

void Lexicon::AddPronunciation(int word, const std::vector<int>& phones) {
  if (word < 1 || word > NumWords())
    SEQDISTILL_THROW(std::invalid_argument, "no word with id " << word);
  if (phones.empty())
    SEQDISTILL_THROW(std::invalid_argument, "empty pronunciation for '" << word_names_[word] << "'");
  for (int p : phones) {
    if (p == kSilencePhone)
      SEQDISTILL_THROW(std::invalid_argument,
                       "pronunciation of '" << word_names_[word] << "' uses the silence phone");
    if (p < 1 || p > NumPhones()) SEQDISTILL_THROW(std::invalid_argument, "bad phone id " << p);
  }
  prons_[word].push_back(phones);
}

int Lexicon::PhoneId(const std::string& name) const {
  auto it = phone_ids_.find(name);
  return it == phone_ids_.end() ? -1 : it->second;
}

int Lexicon::WordId(const std::string& name) const {
  auto it = word_ids_.find(name);
  return it == word_ids_.end() ? -1 : it->second;
}

const std::string& Lexicon::PhoneName(int phone) const { return phone_names_.at(phone); }

const std::string& Lexicon::WordName(int word) const { return word_names_.at(word); }

const std::vector<std::vector<int>>& Lexicon::Pronunciations(int word) const {
  return prons_.at(word);
}

std::vector<int> Lexicon::WordsToIds(const std::vector<std::string>& words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const std::string& w : words) {
    int id = WordId(w);
    if (id < 0) SEQDISTILL_THROW(std::invalid_argument, "out-of-vocabulary word '" << w << "'");
    ids.push_back(id);
  }
  return ids;
}

void Lexicon::CheckWordIds(const std::vector<int>& words) const {
  for (int w : words)
    if (w < 1 || w > NumWords() || prons_[w].empty())
      SEQDISTILL_THROW(std::invalid_argument, "out-of-vocabulary word id " << w);
}

void Lexicon::Write(std::ostream& os) const {
  for (int w = 1; w <= NumWords(); ++w)
    for (const auto& pron : prons_[w]) {
      os << word_names_[w];
      for (int p : pron) os << ' ' << phone_names_[p];
      os << '\n';
    }
}

Lexicon Lexicon::Read(std::istream& is) {
  std::vector<std::vector<std::string>> lines;
  std::set<std::string> phones;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 2)
      SEQDISTILL_THROW(std::invalid_argument, "lexicon entry '" << tok[0] << "' has no phones");
    if (tok[0] == kSilenceName) throw std::invalid_argument("<sil> is reserved in the lexicon");
    for (size_t i = 1; i < tok.size(); ++i) {
      if (tok[i] == kSilenceName)
        SEQDISTILL_THROW(std::invalid_argument, "word '" << tok[0] << "' uses <sil>");
      phones.insert(tok[i]);
    }
    lines.push_back(std::move(tok));
  }
  Lexicon lex;
  for (const std::string& p : phones) lex.AddPhone(p);
  for (const auto& tok : lines) {
    int w = lex.AddWord(tok[0]);
    std::vector<int> pron;
    for (size_t i = 1; i < tok.size(); ++i) pron.push_back(lex.PhoneId(tok[i]));
    lex.AddPronunciation(w, pron);
  }
  return lex;
}

void Lexicon::WriteFile(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path);
  Write(os);
}

Lexicon Lexicon::ReadFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) SEQDISTILL_THROW(std::runtime_error, "cannot read " << path);
  return Read(is);
}

Label HmmTopology::PdfForPhone(int phone) const {
  if (phone < 1 || phone > num_phones_)
    SEQDISTILL_THROW(std::invalid_argument, "phone " << phone << " outside [1, " << num_phones_
                                                     << "]");
  return phone;
}

StateId HmmTopology::AppendPhone(Wfst* fst, StateId src, int phone, Label olabel,
                                 double weight) const {
  Label pdf = PdfForPhone(phone);
  StateId s = fst->AddState();
  fst->AddArc(src, s, pdf, olabel, weight);
  fst->AddArc(s, s, pdf, kEpsilon, 0.0);
  return s;
}

std::vector<std::vector<std::string>> ReadCorpus(std::istream& is) {
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (!tok.empty()) corpus.push_back(std::move(tok));
  }
  return corpus;
}

std::vector<std::vector<std::string>> ReadCorpusFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) SEQDISTILL_THROW(std::runtime_error, "cannot read " << path);
  return ReadCorpus(is);
}

}  // namespace seqdistill
