// src/fst/graph-builder.cc

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

#include "fst/graph-builder.h"

#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "base/error.h"
#include "base/log-math.h"

namespace seqdistill {

std::vector<int> PhonesFromText(const std::vector<int>& sentence, const Lexicon& lexicon,
                                Rng* rng, double p_sil) {
  if (!(p_sil >= 0.0 && p_sil <= 1.0))
    SEQDISTILL_THROW(std::invalid_argument, "p_sil " << p_sil << " outside [0, 1]");
  lexicon.CheckWordIds(sentence);
  std::vector<int> phones;
  if (sentence.empty()) return phones;
  for (int w : sentence) {
    if (rng->Bernoulli(p_sil)) phones.push_back(lexicon.SilencePhone());
    const auto& prons = lexicon.Pronunciations(w);
    const auto& pron = prons[rng->UniformInt(static_cast<int>(prons.size()))];
    phones.insert(phones.end(), pron.begin(), pron.end());
  }
  if (rng->Bernoulli(p_sil)) phones.push_back(lexicon.SilencePhone());
  return phones;
}

namespace {

// Successor counts per context with the backoff rule shared by the phone
// and word models: seen successors keep (1 - backoff) of the ML mass unless
// every vocabulary item was seen, unseen ones split the rest uniformly, and
// unseen contexts are uniform.
class BackoffNgram {
 public:
  BackoffNgram(std::vector<int> vocab, double backoff_mass)
      : vocab_(std::move(vocab)), backoff_(backoff_mass) {}

  void Count(const std::vector<int>& context, int next) {
    auto& c = counts_[context];
    c.total += 1.0;
    c.next[next] += 1.0;
  }

  // Probability of `next` (must be in the vocabulary) after `context`.
  double Prob(const std::vector<int>& context, int next) const {
    double v = static_cast<double>(vocab_.size());
    auto it = counts_.find(context);
    if (it == counts_.end()) return 1.0 / v;
    const Counts& c = it->second;
    double seen = static_cast<double>(c.next.size());
    auto jt = c.next.find(next);
    if (seen == v) return jt->second / c.total;
    if (jt != c.next.end()) return (1.0 - backoff_) * jt->second / c.total;
    return backoff_ / (v - seen);
  }

  const std::vector<int>& Vocab() const { return vocab_; }

 private:
  struct Counts {
    double total = 0.0;
    std::map<int, double> next;
  };
  std::vector<int> vocab_;
  double backoff_;
  std::map<std::vector<int>, Counts> counts_;
};

void CheckBackoff(double backoff_mass) {
  if (!(backoff_mass >= 0.0 && backoff_mass < 1.0))
    SEQDISTILL_THROW(std::invalid_argument, "backoff mass " << backoff_mass << " outside [0, 1)");
}

}  // namespace

Wfst BuildDenominatorGraph(const std::vector<std::vector<int>>& corpus, const Lexicon& lexicon,
                           const HmmTopology& topology, const DenominatorOptions& opts) {
  if (corpus.empty()) throw std::invalid_argument("denominator graph: empty corpus");
  if (opts.ngram_order < 1 || opts.ngram_order > kMaxNgramOrder)
    SEQDISTILL_THROW(std::invalid_argument, "n-gram order " << opts.ngram_order
                                                            << " outside [1, " << kMaxNgramOrder
                                                            << "]");
  if (opts.num_samples_per_sentence < 1)
    throw std::invalid_argument("denominator graph: need at least one sample per sentence");
  CheckBackoff(opts.backoff_mass);

  const int hist_len = opts.ngram_order - 1;
  Rng rng(opts.seed);
  std::vector<std::vector<int>> samples;
  std::set<int> vocab;
  for (const auto& sentence : corpus)
    for (int k = 0; k < opts.num_samples_per_sentence; ++k) {
      samples.push_back(PhonesFromText(sentence, lexicon, &rng, opts.p_sil));
      vocab.insert(samples.back().begin(), samples.back().end());
    }
  if (vocab.empty()) throw std::invalid_argument("denominator graph: corpus has no phones");

  BackoffNgram lm(std::vector<int>(vocab.begin(), vocab.end()), opts.backoff_mass);
  for (const auto& seq : samples) {
    std::vector<int> hist(hist_len, 0);
    for (int p : seq) {
      lm.Count(hist, p);
      if (hist_len > 0) {
        hist.erase(hist.begin());
        hist.push_back(p);
      }
    }
  }

  // A state remembers enough phones for the LM context and for its own
  // self-loop label; 0 pads the beginning of the sentence.
  const int key_len = std::max(hist_len, 1);
  std::map<std::vector<int>, StateId> state_of;
  std::deque<std::vector<int>> queue;
  Wfst fst;
  std::vector<int> start_key(key_len, 0);
  state_of[start_key] = fst.AddState();
  queue.push_back(start_key);
  while (!queue.empty()) {
    std::vector<int> key = queue.front();
    queue.pop_front();
    StateId s = state_of.at(key);
    if (s != fst.Start()) {
      Label self = topology.PdfForPhone(key.back());
      fst.AddArc(s, s, self, kEpsilon, 0.0);
      fst.SetFinal(s, 0.0);
    }
    std::vector<int> context(key.end() - hist_len, key.end());
    for (int q : lm.Vocab()) {
      double prob = lm.Prob(context, q);
      if (prob <= 0.0) continue;
      std::vector<int> next(key.begin() + 1, key.end());
      next.push_back(q);
      auto [it, inserted] = state_of.emplace(next, fst.NumStates());
      if (inserted) {
        fst.AddState();
        queue.push_back(next);
      }
      fst.AddArc(s, it->second, topology.PdfForPhone(q), kEpsilon, std::log(prob));
    }
  }
  return fst;
}

Wfst NumeratorFromTranscript(const std::vector<int>& words, const Lexicon& lexicon,
                             const HmmTopology& topology, bool allow_optional_silence) {
  if (words.empty()) throw std::invalid_argument("numerator graph: empty transcript");
  lexicon.CheckWordIds(words);
  Wfst fst;
  fst.AddState();
  // States from which the next unit may start.
  std::vector<StateId> frontier = {fst.Start()};
  Label sil = topology.PdfForPhone(lexicon.SilencePhone());

  auto add_optional_silence = [&]() {
    StateId s = fst.AddState();
    for (StateId f : frontier) fst.AddArc(f, s, sil, kEpsilon, 0.0);
    fst.AddArc(s, s, sil, kEpsilon, 0.0);
    frontier.push_back(s);
  };

  for (int w : words) {
    if (allow_optional_silence) add_optional_silence();
    std::vector<StateId> next_frontier;
    for (const auto& pron : lexicon.Pronunciations(w)) {
      StateId s = fst.AddState();
      Label first = topology.PdfForPhone(pron[0]);
      for (StateId f : frontier) fst.AddArc(f, s, first, w, 0.0);
      fst.AddArc(s, s, first, kEpsilon, 0.0);
      for (size_t i = 1; i < pron.size(); ++i)
        s = topology.AppendPhone(&fst, s, pron[i], kEpsilon, 0.0);
      next_frontier.push_back(s);
    }
    frontier = std::move(next_frontier);
  }
  if (allow_optional_silence) add_optional_silence();
  for (StateId f : frontier) fst.SetFinal(f, 0.0);
  return fst;
}

Wfst BuildDecodingGraph(const std::vector<std::vector<int>>& corpus, const Lexicon& lexicon,
                        const HmmTopology& topology, const DecodingGraphOptions& opts) {
  if (corpus.empty()) throw std::invalid_argument("decoding graph: empty corpus");
  if (!(opts.p_sil >= 0.0 && opts.p_sil < 1.0))
    SEQDISTILL_THROW(std::invalid_argument, "decoding p_sil " << opts.p_sil << " outside [0, 1)");
  CheckBackoff(opts.backoff_mass);
  const int num_words = lexicon.NumWords();
  const int end_of_sentence = num_words + 1;

  std::vector<int> vocab;
  for (int w = 1; w <= end_of_sentence; ++w) vocab.push_back(w);
  BackoffNgram lm(vocab, opts.backoff_mass);
  for (const auto& sentence : corpus) {
    lexicon.CheckWordIds(sentence);
    int prev = 0;
    for (int w : sentence) {
      lm.Count({prev}, w);
      prev = w;
    }
    lm.Count({prev}, end_of_sentence);
  }

  Wfst fst;
  fst.AddState();
  Label sil = topology.PdfForPhone(lexicon.SilencePhone());

  // Pronunciation chains: first and last state per (word, pronunciation).
  struct Chain {
    int word;
    StateId first;
    StateId last;
    Label first_pdf;
    double log_pron;
  };
  std::vector<Chain> chains;
  std::vector<std::vector<int>> chains_of_word(num_words + 1);
  for (int w = 1; w <= num_words; ++w) {
    const auto& prons = lexicon.Pronunciations(w);
    for (const auto& pron : prons) {
      StateId first = fst.AddState();
      Label pdf = topology.PdfForPhone(pron[0]);
      fst.AddArc(first, first, pdf, kEpsilon, 0.0);
      StateId s = first;
      for (size_t i = 1; i < pron.size(); ++i)
        s = topology.AppendPhone(&fst, s, pron[i], kEpsilon, 0.0);
      chains_of_word[w].push_back(static_cast<int>(chains.size()));
      chains.push_back({w, first, s, pdf, -std::log(static_cast<double>(prons.size()))});
    }
  }

  const double log_sil = opts.p_sil > 0.0 ? std::log(opts.p_sil) : kLogZero;
  const double log_no_sil = std::log1p(-opts.p_sil);

  // Links a context (the start or the end of word `prev`) from source
  // states `srcs` to every word start, directly and through silence.
  auto connect = [&](int prev, const std::vector<StateId>& srcs, bool final_allowed) {
    StateId sil_state = -1;
    if (opts.p_sil > 0.0) {
      sil_state = fst.AddState();
      for (StateId src : srcs) fst.AddArc(src, sil_state, sil, kEpsilon, log_sil);
      fst.AddArc(sil_state, sil_state, sil, kEpsilon, 0.0);
    }
    for (int w = 1; w <= num_words; ++w) {
      double prob = lm.Prob({prev}, w);
      if (prob <= 0.0) continue;
      double log_lm = std::log(prob);
      for (int c : chains_of_word[w]) {
        const Chain& ch = chains[c];
        for (StateId src : srcs)
          fst.AddArc(src, ch.first, ch.first_pdf, w, log_no_sil + log_lm + ch.log_pron);
        if (sil_state >= 0) fst.AddArc(sil_state, ch.first, ch.first_pdf, w, log_lm + ch.log_pron);
      }
    }
    double end_prob = lm.Prob({prev}, end_of_sentence);
    if (final_allowed && end_prob > 0.0) {
      double log_end = std::log(end_prob);
      for (StateId src : srcs) fst.SetFinal(src, log_no_sil + log_end);
      if (sil_state >= 0) fst.SetFinal(sil_state, log_end);
    }
  };

  connect(0, {fst.Start()}, false);
  for (int w = 1; w <= num_words; ++w) {
    std::vector<StateId> ends;
    for (int c : chains_of_word[w]) ends.push_back(chains[c].last);
    connect(w, ends, true);
  }
  // Zero backoff can leave words unreachable.
  return fst.IsTrimmed() ? fst : fst.Trimmed();
}

}  // namespace seqdistill
