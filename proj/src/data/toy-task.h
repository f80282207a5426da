// src/data/toy-task.h

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

#ifndef SEQDISTILL_DATA_TOY_TASK_H_
#define SEQDISTILL_DATA_TOY_TASK_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "base/random.h"
#include "fst/lexicon.h"

namespace seqdistill {

struct Utterance {
  std::string id;
  std::vector<float> samples;
  std::vector<int> transcript;  // word ids; empty when unlabeled
  bool HasTranscript() const { return !transcript.empty(); }
};

struct ToyTaskOptions {
  uint64_t seed = 1;
  int num_words = 20;
  int num_phones = 10;  // including silence
  int labeled_n = 50;
  int unlabeled_n = 200;
  int test_n = 100;
  int corpus_n = 500;
  int sample_rate = 8000;
  double p_sil = 0.2;  // optional silence between words in the audio
  double snr_db = 20.0;
  void Validate() const;
};

/// Synthetic task: a random lexicon over tone "phones", a seeded word bigram
/// grammar, a text corpus and three disjoint audio sets drawn from it.
struct ToyTask {
  Lexicon lexicon;
  std::vector<std::vector<int>> text_corpus;
  std::vector<Utterance> labeled;
  std::vector<Utterance> unlabeled;
  std::vector<Utterance> test;
  int sample_rate = 8000;

  // Throws on overlapping ids, empty or non-finite audio, unknown words,
  // or unlabeled utterances carrying transcripts.
  void Validate() const;
};

// Fully determined by opts (and seed). Throws std::invalid_argument when
// the lexicon cannot be drawn, e.g. more pronunciations requested than
// prefix-free phone sequences of length 1..3 exist.
ToyTask GenToyTask(const ToyTaskOptions& opts);

// Each phone is a fixed-duration (80-120 ms, seeded) tone pair unique to
// the phone; silence is empty. Gaussian noise at snr_db relative to the
// tone level is added throughout. `num_phones` includes silence.
std::vector<float> SynthWaveform(std::span<const int> phones, uint64_t seed, int sample_rate,
                                 int num_phones, double snr_db = 20.0);

// The two tone frequencies (Hz) of a non-silence phone.
std::pair<double, double> PhoneFrequencies(int phone, int num_phones);

struct AugmentOptions {
  double p_apply = 0.5;
  double vol_lo = 0.3, vol_hi = 3.0;
  double pitch_lo = 0.9, pitch_hi = 1.1;
  void Validate() const;
};

// With probability p_apply scales the volume and resamples by a pitch
// factor, each uniform in its range; otherwise returns the input. Always
// draws the Bernoulli, then volume and pitch only when applied.
std::vector<float> Augment(std::span<const float> samples, Rng* rng, const AugmentOptions& opts);

// Linear-interpolation resampling to round(N / pitch) samples, output j
// reading input position j * pitch, then volume scaling.
std::vector<float> ApplyVolumePitch(std::span<const float> samples, double volume, double pitch);

}  // namespace seqdistill

#endif  // SEQDISTILL_DATA_TOY_TASK_H_
