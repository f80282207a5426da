// src/data/toy-task.cc

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

#include "data/toy-task.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "base/error.h"
#include "fst/graph-builder.h"

namespace seqdistill {

void ToyTaskOptions::Validate() const {
  if (num_words < 1 || labeled_n < 1 || unlabeled_n < 1 || test_n < 1 || corpus_n < 1)
    throw std::invalid_argument("toy task: word and utterance counts must be >= 1");
  if (num_phones < 2) throw std::invalid_argument("toy task: num_phones must be >= 2");
  if (sample_rate < 6400)
    SEQDISTILL_THROW(std::invalid_argument, "toy task: sample_rate " << sample_rate
                                                << " cannot carry tones up to 3 kHz");
  if (!(p_sil >= 0.0 && p_sil < 1.0)) throw std::invalid_argument("toy task: p_sil must be in [0,1)");
}

namespace {

bool IsPrefix(const std::vector<int>& a, const std::vector<int>& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// Pronunciations of all words form a prefix-free code, so word strings are
// uniquely decodable from phone strings.
Lexicon RandomLexicon(const ToyTaskOptions& opts, Rng* rng) {
  const int lexical = opts.num_phones - 1;
  int64_t sequences = 0;
  for (int len = 1, n = lexical; len <= 3; ++len, n *= lexical) sequences += n;
  if (opts.num_words > sequences)
    SEQDISTILL_THROW(std::invalid_argument, "toy task: " << opts.num_words
                                                << " words need more distinct pronunciations than the "
                                                << sequences << " phone sequences of length 1..3");
  Lexicon lex;
  char name[16];
  for (int p = 0; p < lexical; ++p) {
    std::snprintf(name, sizeof(name), "p%02d", p + 1);
    lex.AddPhone(name);
  }
  std::vector<std::vector<int>> used;
  for (int w = 0; w < opts.num_words; ++w) {
    std::snprintf(name, sizeof(name), "w%02d", w + 1);
    int word = lex.AddWord(name);
    int nprons = rng->UniformInt(1, 2);
    for (int k = 0; k < nprons; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
        std::vector<int> pron(rng->UniformInt(1, 3));
        for (int& p : pron) p = rng->UniformInt(2, opts.num_phones);
        bool ok = true;
        for (const auto& u : used) ok = ok && !IsPrefix(u, pron) && !IsPrefix(pron, u);
        if (!ok) continue;
        used.push_back(pron);
        lex.AddPronunciation(word, pron);
        placed = true;
      }
      if (!placed && k == 0)
        SEQDISTILL_THROW(std::invalid_argument, "toy task: no prefix-free pronunciation left for word "
                                                    << w + 1 << " of " << opts.num_words
                                                    << " with " << lexical << " phones");
    }
  }
  return lex;
}

// Word bigram: each context (0 = sentence start) allows a few successors
// with random weights; the start context allows every word.
struct Grammar {
  std::vector<std::vector<std::pair<int, double>>> next;  // cumulative probabilities

  int Sample(int context, Rng* rng) const {
    double u = rng->Uniform();
    for (const auto& [w, c] : next[context])
      if (u < c) return w;
    return next[context].back().first;
  }
};

Grammar RandomGrammar(int num_words, Rng* rng) {
  Grammar g;
  g.next.resize(num_words + 1);
  for (int ctx = 0; ctx <= num_words; ++ctx) {
    std::vector<int> succ;
    if (ctx == 0) {
      for (int w = 1; w <= num_words; ++w) succ.push_back(w);
    } else {
      int k = std::min(num_words, rng->UniformInt(3, 6));
      std::set<int> chosen;
      while (static_cast<int>(chosen.size()) < k) chosen.insert(rng->UniformInt(1, num_words));
      succ.assign(chosen.begin(), chosen.end());
    }
    std::vector<double> weights;
    double total = 0.0;
    for (size_t i = 0; i < succ.size(); ++i) total += weights.emplace_back(rng->Uniform(0.5, 1.5));
    double acc = 0.0;
    for (size_t i = 0; i < succ.size(); ++i) {
      acc += weights[i] / total;
      g.next[ctx].emplace_back(succ[i], acc);
    }
  }
  return g;
}

std::vector<int> SampleSentence(const Grammar& g, Rng* rng) {
  int len = rng->UniformInt(2, 6);
  std::vector<int> s;
  int ctx = 0;
  for (int i = 0; i < len; ++i) s.push_back(ctx = g.Sample(ctx, rng));
  return s;
}

}  // namespace

std::pair<double, double> PhoneFrequencies(int phone, int num_phones) {
  if (phone < 2 || phone > num_phones)
    SEQDISTILL_THROW(std::invalid_argument, "no tone for phone " << phone << " of " << num_phones);
  const int lexical = num_phones - 1, k = phone - 2;
  double f1 = 300.0 + (lexical > 1 ? k * 1900.0 / (lexical - 1) : 0.0);
  return {f1, f1 + 800.0};
}

std::vector<float> SynthWaveform(std::span<const int> phones, uint64_t seed, int sample_rate,
                                 int num_phones, double snr_db) {
  if (phones.empty()) throw std::invalid_argument("synth: empty phone sequence");
  for (int p : phones)
    if (p < 1 || p > num_phones)
      SEQDISTILL_THROW(std::invalid_argument, "synth: unknown phone id " << p << " (inventory "
                                                                          << num_phones << ")");
  Rng rng(seed);
  const double amp = 0.25;  // per tone; the pair has RMS amp
  const double noise_std = amp / std::pow(10.0, snr_db / 20.0);
  const int ramp = std::max(1, sample_rate / 200);  // 5 ms fade in and out
  std::vector<float> out;
  for (int p : phones) {
    double ms = rng.Uniform(80.0, 120.0);
    int n = static_cast<int>(std::lround(ms * sample_rate / 1000.0));
    double phase = rng.Uniform(0.0, 2.0 * M_PI);
    std::pair<double, double> f{0.0, 0.0};
    if (p != Lexicon::kSilencePhone) f = PhoneFrequencies(p, num_phones);
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      if (p != Lexicon::kSilencePhone) {
        double t = static_cast<double>(i) / sample_rate;
        double env = std::min(1.0, std::min(i + 1, n - i) / static_cast<double>(ramp));
        v = amp * env *
            (std::sin(2.0 * M_PI * f.first * t + phase) + std::sin(2.0 * M_PI * f.second * t));
      }
      v += noise_std * rng.Gaussian();
      out.push_back(static_cast<float>(std::clamp(v, -1.0, 1.0)));
    }
  }
  return out;
}

ToyTask GenToyTask(const ToyTaskOptions& opts) {
  opts.Validate();
  ToyTask task;
  task.sample_rate = opts.sample_rate;
  Rng lex_rng(DeriveSeed(opts.seed, 0));
  task.lexicon = RandomLexicon(opts, &lex_rng);
  Rng grammar_rng(DeriveSeed(opts.seed, 1));
  Grammar grammar = RandomGrammar(opts.num_words, &grammar_rng);
  Rng corpus_rng(DeriveSeed(opts.seed, 2));
  for (int i = 0; i < opts.corpus_n; ++i) task.text_corpus.push_back(SampleSentence(grammar, &corpus_rng));

  const int num_phones = task.lexicon.NumPhones();
  uint64_t stream = 100;
  auto make = [&](const char* prefix, int count, bool keep_transcript) {
    std::vector<Utterance> set;
    char id[32];
    for (int i = 0; i < count; ++i) {
      uint64_t useed = DeriveSeed(opts.seed, stream++);
      Rng rng(useed);
      std::vector<int> words = SampleSentence(grammar, &rng);
      std::vector<int> phones = PhonesFromText(words, task.lexicon, &rng, opts.p_sil);
      std::snprintf(id, sizeof(id), "%s-%04d", prefix, i + 1);
      Utterance u;
      u.id = id;
      u.samples = SynthWaveform(phones, DeriveSeed(useed, 1), opts.sample_rate, num_phones,
                                opts.snr_db);
      if (keep_transcript) u.transcript = words;
      set.push_back(std::move(u));
    }
    return set;
  };
  task.labeled = make("lab", opts.labeled_n, true);
  task.unlabeled = make("unl", opts.unlabeled_n, false);
  task.test = make("test", opts.test_n, true);
  task.Validate();
  return task;
}

void ToyTask::Validate() const {
  if (labeled.empty()) throw std::invalid_argument("toy task: labeled set is empty");
  std::set<std::string> ids;
  auto check = [&](const std::vector<Utterance>& set, bool labeled_set) {
    for (const Utterance& u : set) {
      if (!ids.insert(u.id).second)
        SEQDISTILL_THROW(std::invalid_argument, "toy task: utterance id " << u.id << " repeats");
      if (u.samples.empty())
        SEQDISTILL_THROW(std::invalid_argument, "toy task: utterance " << u.id << " has no samples");
      for (float x : u.samples)
        if (!std::isfinite(x))
          SEQDISTILL_THROW(std::invalid_argument, "toy task: utterance " << u.id
                                                                         << " has non-finite samples");
      if (labeled_set != u.HasTranscript())
        SEQDISTILL_THROW(std::invalid_argument, "toy task: utterance " << u.id
                                                    << (labeled_set ? " lacks" : " has")
                                                    << " a transcript");
      if (labeled_set) lexicon.CheckWordIds(u.transcript);
    }
  };
  check(labeled, true);
  check(unlabeled, false);
  check(test, true);
  for (const auto& s : text_corpus) lexicon.CheckWordIds(s);
}

void AugmentOptions::Validate() const {
  if (!(p_apply >= 0.0 && p_apply <= 1.0)) throw std::invalid_argument("augment: p_apply must be in [0,1]");
  if (!(vol_lo > 0.0 && vol_lo <= vol_hi) || !(pitch_lo > 0.0 && pitch_lo <= pitch_hi))
    throw std::invalid_argument("augment: ranges need 0 < lo <= hi");
}

std::vector<float> ApplyVolumePitch(std::span<const float> samples, double volume, double pitch) {
  if (samples.empty()) throw std::invalid_argument("augment: empty input");
  if (!(volume > 0.0) || !(pitch > 0.0)) throw std::invalid_argument("augment: factors must be positive");
  const size_t n = samples.size();
  std::vector<float> out;
  if (pitch == 1.0) {
    out.assign(samples.begin(), samples.end());
  } else {
    size_t m = std::max<size_t>(1, static_cast<size_t>(std::llround(n / pitch)));
    out.resize(m);
    for (size_t j = 0; j < m; ++j) {
      double pos = j * pitch;
      size_t i = static_cast<size_t>(pos);
      if (i >= n - 1) {
        out[j] = samples[n - 1];
        continue;
      }
      double frac = pos - i;
      out[j] = static_cast<float>(samples[i] * (1.0 - frac) + samples[i + 1] * frac);
    }
  }
  if (volume != 1.0)
    for (float& x : out) x = static_cast<float>(x * volume);
  return out;
}

std::vector<float> Augment(std::span<const float> samples, Rng* rng, const AugmentOptions& opts) {
  opts.Validate();
  if (samples.empty()) throw std::invalid_argument("augment: empty input");
  if (!rng->Bernoulli(opts.p_apply)) return {samples.begin(), samples.end()};
  double volume = rng->Uniform(opts.vol_lo, opts.vol_hi);
  double pitch = rng->Uniform(opts.pitch_lo, opts.pitch_hi);
  return ApplyVolumePitch(samples, volume, pitch);
}

}  // namespace seqdistill
