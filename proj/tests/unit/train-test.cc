// tests/unit/train-test.cc

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

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "fst/graph-builder.h"
#include "train/trainer.h"

using namespace seqdistill;

namespace {

struct TinySetup {
  ToyTask task;
  Wfst den;
  Wfst graph;
};

TinySetup MakeTiny() {
  ToyTaskOptions o;
  o.num_words = 4;
  o.num_phones = 4;
  o.labeled_n = 6;
  o.unlabeled_n = 6;
  o.test_n = 3;
  o.corpus_n = 30;
  TinySetup s{GenToyTask(o), {}, {}};
  HmmTopology topo(s.task.lexicon.NumPhones());
  DenominatorOptions d;
  d.seed = 3;
  s.den = BuildDenominatorGraph(s.task.text_corpus, s.task.lexicon, topo, d);
  s.graph = BuildDecodingGraph(s.task.text_corpus, s.task.lexicon, topo, {});
  return s;
}

ModelConfig TinyConfig(int num_pdfs, bool streaming) {
  ModelConfig c = DeskModelConfig(streaming ? "S5" : "T", num_pdfs);
  c.encoder_dim = 8;
  c.ffn_dim = 16;
  c.heads = 2;
  c.blocks = 2;
  c.cnn_channels_first_two = 4;
  c.cnn_channels_rest = 4;
  return c;
}

Tensor Identity(int n) {
  Tensor t({n, n});
  for (int i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

}  // namespace

TEST_CASE("tri-state schedule examples and continuity") {
  TriStateSchedule s{5e-4, 1000};
  CHECK(std::abs(LrAt(100, s) - 5e-4) <= 1e-15 * 5e-4);
  CHECK(std::abs(LrAt(500, s) - 5e-4) <= 1e-15 * 5e-4);
  CHECK(std::abs(LrAt(1000, s) - 2.5e-5) <= 1e-15 * 2.5e-5);
  CHECK(LrAt(0, s) == 0.0);
  CHECK(LrAt(50, s) == doctest::Approx(2.5e-4).epsilon(1e-14));
  CHECK(LrAt(750, s) == doctest::Approx(5e-4 * (0.05 + 0.95 * 0.5)).epsilon(1e-14));
  const double bound = 5e-4 / (0.1 * 1000) + 1e-12;
  for (int t = 1; t <= 1000; ++t) CHECK(std::abs(LrAt(t, s) - LrAt(t - 1, s)) <= bound);
  CHECK_THROWS_AS(LrAt(-1, s), std::out_of_range);
  CHECK_THROWS_AS(LrAt(1001, s), std::out_of_range);
  CHECK_THROWS_AS((TriStateSchedule{5e-4, 10, 0.6, 0.4}.Validate()), std::invalid_argument);
  CHECK_THROWS_AS((TriStateSchedule{0.0, 10}.Validate()), std::invalid_argument);
}

TEST_CASE("adam matches a hand-computed two-step trace") {
  Tensor x = Tensor::Vector({1.0});
  Adam adam({&x});
  adam.Step(std::vector<Tensor>{Tensor::Vector({0.5})}, 0.1);
  // m = 0.05, v = 0.005; bias-corrected 0.5 and 0.25.
  double expect = 1.0 - 0.1 * 0.5 / (std::sqrt(0.25) + 1e-8);
  CHECK(x[0] == doctest::Approx(expect).epsilon(1e-15));
  adam.Step(std::vector<Tensor>{Tensor::Vector({-1.0})}, 0.1);
  // m = -0.055, v = 0.0249; corrections 1 - 0.81 and 1 - 0.9604.
  const double mhat = -0.055 / 0.19, vhat = 0.0249 / 0.0396;
  expect -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(x[0] == doctest::Approx(expect).epsilon(1e-14));
  CHECK(adam.Steps() == 2);
}

TEST_CASE("word error rate") {
  CHECK(AlignWords({1, 2, 3}, {1, 4, 3}).Errors() == 1);
  WerAccumulator acc;
  acc.Add({1, 2, 3}, {1, 4, 3});
  CHECK(acc.Wer() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(acc.ExactSentences() == 0);

  EditCounts c = AlignWords({1, 2, 3}, {2, 3, 4, 5});
  CHECK(c.deletions == 1);
  CHECK(c.insertions == 2);
  CHECK(c.substitutions == 0);

  WerAccumulator same;
  same.Add({1, 2}, {1, 2});
  same.Add({3}, {3});
  CHECK(same.Wer() == 0.0);
  CHECK(same.ExactSentences() == 2);
  CHECK_THROWS_AS(WerAccumulator().Wer(), std::logic_error);
}

TEST_CASE("run report csv leaves absent terms empty") {
  RunReport r;
  r.steps.push_back({1, 0.5, 2.0, 1.5, std::nullopt});
  r.steps.push_back({2, 0.25, 0.125, std::nullopt, 0.1});
  CHECK(r.Csv() == "step,lr,total,hidden,pred\n1,0.5,2,1.5,\n2,0.25,0.125,,0.1\n");
  r.AddSummary("wer", 0.25);
  r.AddSummary("wer", 0.5);
  CHECK(r.SummaryText() == "wer=0.5\n");
  CHECK(r.Summary("missing").empty());
}

TEST_CASE("teacher training is deterministic and makes progress") {
  TinySetup s = MakeTiny();
  ModelConfig c = TinyConfig(s.task.lexicon.NumPhones(), false);
  TrainOptions o;
  o.epochs = 12;
  o.peak_lr = 3e-3;
  o.accumulate = 2;
  TeacherResult a = TrainTeacher(s.task.labeled, s.task.lexicon, c, s.den, o);
  TeacherResult b = TrainTeacher(s.task.labeled, s.task.lexicon, c, s.den, o);
  CHECK(a.model.BitwiseEqual(b.model));
  CHECK(a.report.Csv() == b.report.Csv());
  REQUIRE(a.report.steps.size() == 36u);
  for (const StepRecord& r : a.report.steps) CHECK(std::isfinite(r.total));
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 3; ++i) {
    first += a.report.steps[i].total;
    last += a.report.steps[a.report.steps.size() - 1 - i].total;
  }
  CHECK(last < first);
  CHECK(a.skipped == 0);

  c.num_pdfs += 1;
  CHECK_THROWS_AS(TrainTeacher(s.task.labeled, s.task.lexicon, c, s.den, o),
                  std::invalid_argument);
}

TEST_CASE("pseudo supervision") {
  TinySetup s = MakeTiny();
  AcousticModel teacher(TinyConfig(s.task.lexicon.NumPhones(), false), 4);
  PseudoSupervision one = MakePseudoSupervision(teacher, s.task.unlabeled, s.den, {1, 10.0});
  REQUIRE(one.numerators.size() == s.task.unlabeled.size());
  for (const auto& [id, fst] : one.numerators) {
    // A single path is a chain: one arc per frame, each state leaving once.
    std::vector<int> out(fst.NumStates());
    for (const Arc& a : fst.Arcs()) ++out[a.src];
    for (int n : out) CHECK(n <= 1);
    CHECK(fst.Finals().size() == 1u);
  }
  PseudoSupervision four = MakePseudoSupervision(teacher, s.task.unlabeled, s.den, {});
  PseudoSupervision again = MakePseudoSupervision(teacher, s.task.unlabeled, s.den, {});
  CHECK(four.numerators == again.numerators);

  const std::string dir =
      (std::filesystem::temp_directory_path() / "seqdistill-pseudo-test").string();
  std::filesystem::remove_all(dir);
  SavePseudoSupervision(four, dir);
  PseudoSupervision loaded = LoadPseudoSupervision(dir);
  CHECK(loaded.numerators == four.numerators);
  CHECK(loaded.skipped == four.skipped);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(PseudoNumerator(Tensor({3, s.task.lexicon.NumPhones()}), s.den, {0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("distillation step") {
  TinySetup s = MakeTiny();
  const int pdfs = s.task.lexicon.NumPhones();
  AcousticModel teacher(TinyConfig(pdfs, false), 4);
  PseudoSupervision sup = MakePseudoSupervision(teacher, s.task.unlabeled, s.den, {});
  DistillConfig cfg;
  cfg.layer_map = DefaultLayerMap(1, 2, {});
  cfg.train.epochs = 0;
  ModelConfig student_config = TinyConfig(pdfs, true);
  student_config.blocks = 1;
  const AcousticModel student(student_config, 8);

  SUBCASE("zero epochs return the initial student unchanged") {
    DistillResult r = DistillStep(teacher, student, sup, s.task.unlabeled, s.den, cfg);
    CHECK(r.student.BitwiseEqual(student));
    CHECK(r.report.steps.empty());
    std::vector<Tensor> proj{Identity(8)};
    DistillResult p = DistillStep(teacher, student, sup, s.task.unlabeled, s.den, cfg, &proj);
    REQUIRE(p.projections.size() == 1u);
    CHECK(p.projections[0].BitwiseEqual(proj[0]));
  }

  SUBCASE("a teacher clone with identity projections has zero hidden loss") {
    DistillConfig c = cfg;
    c.layer_map.pairs = {{1, 1}, {2, 2}};
    c.weights = {0.0, 0.8};
    c.train.epochs = 1;
    c.train.augment = false;
    c.train.accumulate = 1;
    std::vector<Tensor> proj{Identity(8), Identity(8)};
    DistillResult r = DistillStep(teacher, teacher, sup, s.task.unlabeled, s.den, c, &proj);
    REQUIRE(!r.report.steps.empty());
    REQUIRE(r.report.steps[0].hidden.has_value());
    CHECK(*r.report.steps[0].hidden == 0.0);
    CHECK(!r.report.steps[0].pred.has_value());
  }

  SUBCASE("training is reproducible and traces every weighted term") {
    DistillConfig c = cfg;
    c.train.epochs = 2;
    c.train.accumulate = 3;
    c.chunk = {4, 2, 20.0};
    DistillResult a = DistillStep(teacher, student, sup, s.task.unlabeled, s.den, c);
    DistillResult b = DistillStep(teacher, student, sup, s.task.unlabeled, s.den, c);
    CHECK(a.student.BitwiseEqual(b.student));
    CHECK(a.report.Csv() == b.report.Csv());
    CHECK(!a.student.BitwiseEqual(student));
    REQUIRE(a.report.steps.size() == 4u);
    for (const StepRecord& r : a.report.steps) {
      REQUIRE(r.hidden.has_value());
      REQUIRE(r.pred.has_value());
      CHECK(r.total == doctest::Approx(0.2 * *r.hidden + 0.8 * *r.pred).epsilon(1e-12));
    }
  }

  SUBCASE("layer maps must fit both depths") {
    DistillConfig c = cfg;
    c.layer_map.pairs = {{1, 3}};
    CHECK_THROWS_AS(DistillStep(teacher, student, sup, s.task.unlabeled, s.den, c),
                    std::invalid_argument);
    c.layer_map.pairs.clear();
    CHECK_THROWS_AS(DistillStep(teacher, student, sup, s.task.unlabeled, s.den, c),
                    std::invalid_argument);
    c.weights = {1.0, 0.0};
    CHECK_NOTHROW(DistillStep(teacher, student, sup, s.task.unlabeled, s.den, c));
  }
}

TEST_CASE("evaluation and benchmarking preconditions") {
  TinySetup s = MakeTiny();
  AcousticModel m(TinyConfig(s.task.lexicon.NumPhones(), true), 2);
  WerAccumulator details;
  double w = EvaluateWer(m, s.task.test, s.graph, ChunkSpec::Full(), &details);
  CHECK(w == EvaluateWer(m, s.task.test, s.graph, ChunkSpec::Full()));
  CHECK(details.Sentences() == static_cast<int>(s.task.test.size()));
  CHECK_THROWS_AS(EvaluateWer(m, {}, s.graph, ChunkSpec::Full()), std::invalid_argument);
  CHECK_THROWS_AS(EvaluateWer(m, s.task.unlabeled, s.graph, ChunkSpec::Full()),
                  std::invalid_argument);

  CHECK_THROWS_AS(BenchRtf({&m}, s.task.test, ChunkSpec::Full(), 8000), std::invalid_argument);
  Utterance ten_seconds{"long", std::vector<float>(80000, 0.01f), {}};
  std::vector<double> rtf = BenchRtf({&m, &m}, {ten_seconds}, {8, 4, 20.0}, 8000);
  REQUIRE(rtf.size() == 2u);
  CHECK(rtf[0] > 0.0);
  CHECK(rtf[1] > 0.0);
}
