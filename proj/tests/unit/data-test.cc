// tests/unit/data-test.cc

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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <set>

#include "data/audio-io.h"
#include "doctest.h"

using namespace seqdistill;

namespace {

ToyTaskOptions SmallOptions(uint64_t seed) {
  ToyTaskOptions o;
  o.seed = seed;
  o.labeled_n = 4;
  o.unlabeled_n = 5;
  o.test_n = 3;
  o.corpus_n = 20;
  return o;
}

bool SameUtterances(const std::vector<Utterance>& a, const std::vector<Utterance>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].transcript != b[i].transcript ||
        a[i].samples.size() != b[i].samples.size())
      return false;
    if (std::memcmp(a[i].samples.data(), b[i].samples.data(), a[i].samples.size() * sizeof(float)))
      return false;
  }
  return true;
}

// Frequency of the largest DFT magnitude, searched on a 10 Hz grid.
double PeakFrequency(std::span<const float> x, int rate) {
  double best_f = 0.0, best = -1.0;
  for (double f = 100.0; f < rate / 2.0; f += 10.0) {
    std::complex<double> acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
      acc += static_cast<double>(x[i]) * std::polar(1.0, -2.0 * M_PI * f * i / rate);
    if (std::abs(acc) > best) best = std::abs(acc), best_f = f;
  }
  return best_f;
}

}  // namespace

TEST_CASE("toy task generation is deterministic and valid") {
  ToyTask a = GenToyTask(SmallOptions(3)), b = GenToyTask(SmallOptions(3));
  CHECK(SameUtterances(a.labeled, b.labeled));
  CHECK(SameUtterances(a.unlabeled, b.unlabeled));
  CHECK(SameUtterances(a.test, b.test));
  CHECK(a.text_corpus == b.text_corpus);
  ToyTask c = GenToyTask(SmallOptions(4));
  CHECK_FALSE(SameUtterances(a.labeled, c.labeled));

  for (const Utterance& u : a.unlabeled) CHECK_FALSE(u.HasTranscript());
  for (const Utterance& u : a.labeled) {
    CHECK(u.transcript.size() >= 2);
    CHECK(u.transcript.size() <= 6);
  }
  // Pronunciations: 1-2 per word, 1-3 phones each, prefix-free overall.
  std::vector<std::vector<int>> prons;
  for (int w = 1; w <= a.lexicon.NumWords(); ++w) {
    const auto& ps = a.lexicon.Pronunciations(w);
    CHECK(ps.size() >= 1);
    CHECK(ps.size() <= 2);
    for (const auto& p : ps) {
      CHECK(p.size() >= 1);
      CHECK(p.size() <= 3);
      prons.push_back(p);
    }
  }
  bool prefix_free = true;
  for (size_t i = 0; i < prons.size(); ++i)
    for (size_t j = 0; j < prons.size(); ++j)
      if (i != j && prons[i].size() <= prons[j].size() &&
          std::equal(prons[i].begin(), prons[i].end(), prons[j].begin()))
        prefix_free = false;
  CHECK(prefix_free);
  CHECK(a.lexicon.NumPhones() == 10);
  CHECK(a.lexicon.NumWords() == 20);
}

TEST_CASE("default toy task passes its invariants") {
  ToyTask t = GenToyTask(ToyTaskOptions{});
  CHECK_NOTHROW(t.Validate());
  CHECK(t.labeled.size() == 50);
  CHECK(t.unlabeled.size() == 200);
  CHECK(t.text_corpus.size() == 500);
  std::set<std::string> ids;
  for (const auto* set : {&t.labeled, &t.unlabeled, &t.test})
    for (const Utterance& u : *set) ids.insert(u.id);
  CHECK(ids.size() == t.labeled.size() + t.unlabeled.size() + t.test.size());
  // A duplicated id or a transcript on unlabeled audio is rejected.
  ToyTask bad = t;
  bad.test[0].id = bad.labeled[0].id;
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
  bad = t;
  bad.unlabeled[0].transcript = {1};
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
}

TEST_CASE("toy task preconditions") {
  ToyTaskOptions o = SmallOptions(1);
  o.labeled_n = 0;
  CHECK_THROWS_AS(GenToyTask(o), std::invalid_argument);
  o = SmallOptions(1);
  o.num_phones = 1;
  CHECK_THROWS_AS(GenToyTask(o), std::invalid_argument);
  // One lexical phone has only 3 sequences of length 1..3.
  o = SmallOptions(1);
  o.num_phones = 2;
  o.num_words = 4;
  CHECK_THROWS_AS(GenToyTask(o), std::invalid_argument);
  // Two lexical phones give 2 + 4 + 8 = 14 sequences.
  o.num_phones = 3;
  o.num_words = 15;
  CHECK_THROWS_AS(GenToyTask(o), std::invalid_argument);
}

TEST_CASE("synthesized phones") {
  const int rate = 8000, phones = 10;
  for (int p = 1; p <= phones; ++p) {
    std::vector<int> one = {p};
    auto w = SynthWaveform(one, 5 + p, rate, phones);
    CHECK(w.size() >= 640);
    CHECK(w.size() <= 960);
    auto again = SynthWaveform(one, 5 + p, rate, phones);
    CHECK(std::memcmp(w.data(), again.data(), w.size() * sizeof(float)) == 0);
  }
  // Each tone phone peaks at one of its own two frequencies.
  std::set<double> peaks;
  for (int p = 2; p <= phones; ++p) {
    std::vector<int> one = {p};
    auto w = SynthWaveform(one, 11, rate, phones);
    double f = PeakFrequency(w, rate);
    auto [f1, f2] = PhoneFrequencies(p, phones);
    CHECK((std::abs(f - f1) <= 15.0 || std::abs(f - f2) <= 15.0));
    peaks.insert(std::abs(f - f1) <= 15.0 ? f1 : f2);
  }
  CHECK(peaks.size() == static_cast<size_t>(phones - 1));
  // Silence stays near the noise floor.
  std::vector<int> sil = {1};
  auto s = SynthWaveform(sil, 2, rate, phones);
  double e = 0.0;
  for (float x : s) e += x * x;
  CHECK(std::sqrt(e / s.size()) < 0.05);
  std::vector<int> unknown = {11};
  CHECK_THROWS_AS(SynthWaveform(unknown, 1, rate, phones), std::invalid_argument);
  CHECK_THROWS_AS(SynthWaveform(std::span<const int>(), 1, rate, phones), std::invalid_argument);
}

TEST_CASE("augmentation") {
  std::vector<float> x = {0.1f, -0.2f, 0.3f, 0.25f, -0.4f, 0.0f, 0.05f, 0.2f, -0.1f, 0.3f};
  Rng rng(1);
  AugmentOptions off;
  off.p_apply = 0.0;
  for (int i = 0; i < 5; ++i) CHECK(Augment(x, &rng, off) == x);

  auto doubled = ApplyVolumePitch(x, 2.0, 1.0);
  REQUIRE(doubled.size() == x.size());
  for (size_t i = 0; i < x.size(); ++i) CHECK(doubled[i] == 2.0f * x[i]);

  std::vector<float> long_x(1000, 0.5f);
  CHECK(ApplyVolumePitch(long_x, 1.0, 0.9).size() == 1111);  // round(1000 / 0.9)
  CHECK(ApplyVolumePitch(long_x, 1.0, 1.1).size() == 909);
  // Linear interpolation at position 1.5 of a ramp.
  std::vector<float> ramp = {0.0f, 1.0f, 2.0f, 3.0f};
  auto slow = ApplyVolumePitch(ramp, 1.0, 0.5);
  REQUIRE(slow.size() == 8);
  CHECK(slow[3] == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(slow[7] == 3.0f);

  AugmentOptions identity;
  identity.p_apply = 1.0;
  identity.vol_lo = identity.vol_hi = 1.0;
  identity.pitch_lo = identity.pitch_hi = 1.0;
  CHECK(Augment(x, &rng, identity) == x);

  // Same generator state, same result; the default applies about half the time.
  AugmentOptions def;
  Rng r1(9), r2(9);
  int applied = 0;
  for (int i = 0; i < 200; ++i) {
    auto a = Augment(long_x, &r1, def), b = Augment(long_x, &r2, def);
    CHECK(a == b);
    applied += a != long_x;
  }
  CHECK(applied > 70);
  CHECK(applied < 130);

  CHECK_THROWS_AS(Augment(std::span<const float>(), &rng, def), std::invalid_argument);
  AugmentOptions bad;
  bad.vol_lo = 2.0;
  bad.vol_hi = 1.0;
  CHECK_THROWS_AS(Augment(x, &rng, bad), std::invalid_argument);
}

TEST_CASE("wav, manifest and task directory round trips") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "seqdistill-data-test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::vector<float> x = {0.0f, 0.5f, -0.5f, 1.0f, -1.0f, 2.0f, 0.123f};
  WriteWav((dir / "a.wav").string(), x, 8000);
  int rate = 0;
  auto y = ReadWav((dir / "a.wav").string(), &rate);
  CHECK(rate == 8000);
  REQUIRE(y.size() == x.size());
  for (size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(y[i] - std::clamp(x[i], -1.0f, 1.0f)) <= 1.0 / 32768 + 1e-6);
  CHECK(fs::file_size(dir / "a.wav") == 44 + 2 * x.size());

  std::vector<ManifestEntry> m = {{"u1", "wav/u1.wav", {"w01", "w02"}}, {"u2", "wav/u2.wav", {}}};
  WriteManifest((dir / "m.tsv").string(), m);
  auto back = ReadManifest((dir / "m.tsv").string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].transcript == m[0].transcript);
  CHECK(back[1].transcript.empty());
  CHECK(back[1].wav_path == "wav/u2.wav");

  ToyTask task = GenToyTask(SmallOptions(2));
  SaveToyTask(task, (dir / "task").string());
  ToyTask loaded = LoadToyTask((dir / "task").string());
  CHECK(loaded.text_corpus == task.text_corpus);
  REQUIRE(loaded.labeled.size() == task.labeled.size());
  CHECK(loaded.labeled[1].transcript == task.labeled[1].transcript);
  double worst = 0.0;
  for (size_t i = 0; i < task.test[0].samples.size(); ++i)
    worst = std::max(worst, std::abs(double(loaded.test[0].samples[i]) - task.test[0].samples[i]));
  CHECK(worst <= 1.0 / 32768 + 1e-6);
  CHECK_THROWS(ReadWav((dir / "missing.wav").string(), &rate));
  fs::remove_all(dir);
}
