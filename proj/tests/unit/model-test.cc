// tests/unit/model-test.cc

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
#include <cstdio>
#include <fstream>
#include <string>

#include "autodiff/grad-check.h"
#include "base/error.h"
#include "base/random.h"
#include "doctest.h"
#include "model/acoustic-model.h"

using namespace seqdistill;

namespace {

std::vector<float> Noise(uint64_t seed, int n, double amp = 0.3) {
  Rng rng(seed);
  std::vector<float> w(n);
  for (float& x : w) x = static_cast<float>(amp * rng.Gaussian());
  return w;
}

// Small enough for finite differences, still with every layer type.
ModelConfig TinyConfig(bool causal, bool group_norm) {
  ModelConfig c;
  c.cnn_kernels = {4, 3};
  c.cnn_strides = {2, 2};
  c.cnn_channels_first_two = 4;
  c.cnn_channels_rest = 4;
  c.causal_cnn = causal;
  c.group_norm = group_norm;
  c.norm_groups = 2;
  c.encoder_dim = 8;
  c.ffn_dim = 12;
  c.blocks = 2;
  c.heads = 2;
  c.num_pdfs = 3;
  return c;
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.Size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Tensor TopRows(const Tensor& x, int rows) {
  Tensor out = Tensor::Zeros({rows, x.Cols()});
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < x.Cols(); ++c) out(r, c) = x(r, c);
  return out;
}

}  // namespace

TEST_CASE("one second at 8 kHz gives fifty 20 ms frames") {
  for (const char* name : {"T", "S1", "S5"}) {
    ModelConfig c = DeskModelConfig(name, 7);
    CHECK(c.TotalStride() == 160);
    CHECK(c.FrameDurationMs() == 20.0);
    AcousticModel model(c, 1);
    auto wav = Noise(3, 8000);
    ModelValues out = RunModel(model, WaveformTensor(wav));
    CHECK(out.output.Rows() == 50);
    CHECK(out.output.Cols() == 7);
    REQUIRE(static_cast<int>(out.hiddens.size()) == c.blocks);
    for (const Tensor& h : out.hiddens) {
      CHECK(h.Rows() == 50);
      CHECK(h.Cols() == c.encoder_dim);
    }
  }
  // Trailing samples short of a frame are dropped; shorter than one frame throws.
  AcousticModel model(DeskModelConfig("S4", 5), 1);
  CHECK(RunModel(model, WaveformTensor(Noise(1, 8159))).output.Rows() == 50);
  CHECK_THROWS_AS(RunModel(model, WaveformTensor(Noise(1, 159))), std::invalid_argument);
}

TEST_CASE("parameter count matches the analytic formula") {
  for (const char* name : {"T", "S1", "S2", "S3", "S4", "S5"}) {
    ModelConfig c = DeskModelConfig(name, 11);
    CHECK(AcousticModel(c, 0).NumScalars() == ParamCount(c));
  }
  ModelConfig c = TinyConfig(false, false);
  // Hand count: cnn 4*1*4+12, 3*4*4+12; proj 4*8+8; per block
  // 4*8 + 4*(64+8) + 8*12 + 12 + 12*8 + 8; pred 8*3+3.
  int64_t block = 32 + 288 + 96 + 12 + 96 + 8;
  CHECK(ParamCount(c) == 28 + 60 + 40 + 2 * block + 27);
  c.blocks = 0;
  CHECK(AcousticModel(c, 0).NumScalars() == ParamCount(c));
  // The desk ladder shrinks strictly.
  int64_t prev = ParamCount(DeskModelConfig("T", 11));
  for (const char* name : {"S1", "S2", "S3", "S4", "S5"}) {
    int64_t n = ParamCount(DeskModelConfig(name, 11));
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("config text round trip and validation") {
  ModelConfig c = DeskModelConfig("S5", 9);
  CHECK(ModelConfig::FromText(c.ToText()) == c);
  CHECK_THROWS_AS(ModelConfig::FromText(c.ToText() + "dropout=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(ModelConfig::FromText("blocks=x\nnum_pdfs=3\n"), std::invalid_argument);
  ModelConfig bad = c;
  bad.heads = 5;
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
  bad = c;
  bad.cnn_kernels[0] = 4;  // kernel shorter than stride 5
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
  bad = c;
  bad.num_pdfs = 0;
  CHECK_THROWS_AS(bad.Validate(), std::invalid_argument);
  CHECK_THROWS_AS(DeskModelConfig("S9", 3), std::invalid_argument);
  // 5 + 4*5 + 4*20 + 2*80 samples of left context.
  CHECK(c.ReceptiveFieldLeft() == 265);
}

TEST_CASE("zero-parameter encoder edge cases") {
  ModelConfig c = TinyConfig(true, true);
  c.blocks = 0;
  AcousticModel model(c, 4);
  ModelValues out = RunModel(model, WaveformTensor(Noise(2, 64)));
  CHECK(out.hiddens.empty());
  CHECK(out.output.Rows() == 16);
  // Silence: the norms see constant frames and must stay finite.
  for (const char* name : {"T", "S5"}) {
    AcousticModel m(DeskModelConfig(name, 4), 2);
    ModelValues z = RunModel(m, WaveformTensor(std::vector<float>(1600, 0.0f)));
    CHECK(z.output.AllFinite());
    for (const Tensor& h : z.hiddens) CHECK(h.AllFinite());
  }
}

TEST_CASE("an all-true mask is the same computation as no mask") {
  AcousticModel model(DeskModelConfig("T", 5), 8);
  Tensor wav = WaveformTensor(Noise(5, 4000));
  ModelValues plain = RunModel(model, wav);
  auto mask = std::make_shared<const AttentionMask>(25 * 25, 1);
  ModelValues masked = RunModel(model, wav, mask);
  CHECK(masked.output.BitwiseEqual(plain.output));
  auto wrong = std::make_shared<const AttentionMask>(24 * 24, 1);
  CHECK_THROWS_AS(RunModel(model, wav, wrong), ShapeError);
}

TEST_CASE("causal encoder outputs do not depend on later samples") {
  AcousticModel model(DeskModelConfig("S2", 6), 3);
  auto wav = Noise(9, 4800);  // 30 frames
  Tensor full = RunModel(model, WaveformTensor(wav)).output;
  // Without a mask the attention still mixes all frames, so compare the CNN
  // and projection directly, and the whole model on a frame-causal mask.
  auto cnn = [&](std::span<const float> w) {
    Tape tape;
    BoundModel m(model, &tape, false);
    return InputProjection(m, CnnEncode(m, tape.Constant(WaveformTensor(w)))).value();
  };
  Tensor cnn_full = cnn(wav);
  auto causal_mask = [](int l) {
    auto mk = std::make_shared<AttentionMask>(static_cast<size_t>(l) * l, 0);
    for (int t = 0; t < l; ++t)
      for (int j = 0; j <= t; ++j) (*mk)[static_cast<size_t>(t) * l + j] = 1;
    return std::shared_ptr<const AttentionMask>(mk);
  };
  Tensor masked_full = RunModel(model, WaveformTensor(wav), causal_mask(30)).output;
  for (int frames : {1, 7, 20}) {
    std::span<const float> prefix(wav.data(), frames * 160);
    CHECK(MaxAbsDiff(cnn(prefix), TopRows(cnn_full, frames)) <= 1e-12);
    Tensor p = RunModel(model, WaveformTensor(prefix), causal_mask(frames)).output;
    CHECK(MaxAbsDiff(p, TopRows(masked_full, frames)) <= 1e-12);
  }
  // The non-causal teacher looks ahead, so its truncated encoding differs.
  AcousticModel teacher(DeskModelConfig("T", 6), 3);
  Tape t1, t2;
  BoundModel m1(teacher, &t1, false), m2(teacher, &t2, false);
  Tensor a = CnnEncode(m1, t1.Constant(WaveformTensor(wav))).value();
  Tensor b = CnnEncode(m2, t2.Constant(WaveformTensor(std::span<const float>(wav.data(), 1600))))
                 .value();
  CHECK(MaxAbsDiff(b, TopRows(a, 10)) > 1e-6);
}

TEST_CASE("masked frames do not influence the frames that cannot see them") {
  AcousticModel model(TinyConfig(true, true), 12);
  auto wav = Noise(4, 48);  // 12 frames of 4 samples
  // Frames 0..5 attend to 0..5 only; frames 6.. attend to everything.
  auto mask = std::make_shared<AttentionMask>(144, 1);
  for (int t = 0; t < 6; ++t)
    for (int j = 6; j < 12; ++j) (*mask)[t * 12 + j] = 0;
  Tensor base = RunModel(model, WaveformTensor(wav), mask).output;
  auto changed = wav;
  for (int i = 24; i < 48; ++i) changed[i] = 0.0f;
  Tensor other = RunModel(model, WaveformTensor(changed), mask).output;
  CHECK(MaxAbsDiff(TopRows(base, 6), TopRows(other, 6)) <= 1e-12);
  CHECK(MaxAbsDiff(base, other) > 1e-6);
}

TEST_CASE("construction and forward are reproducible") {
  ModelConfig c = DeskModelConfig("S3", 5);
  AcousticModel a(c, 77), b(c, 77), other(c, 78);
  CHECK(a.BitwiseEqual(b));
  CHECK_FALSE(a.BitwiseEqual(other));
  Tensor wav = WaveformTensor(Noise(6, 3200));
  CHECK(RunModel(a, wav).output.BitwiseEqual(RunModel(b, wav).output));

  // Regression values for a fixed seed; regenerate only on intended changes.
  Tensor out = RunModel(AcousticModel(TinyConfig(false, false), 2024),
                        WaveformTensor(Noise(1, 40)))
                   .output;
  std::ifstream is(std::string(SEQDISTILL_TEST_DATA_DIR) + "/tiny-model-output.txt");
  REQUIRE(is.good());
  int rows = 0, cols = 0;
  is >> rows >> cols;
  REQUIRE(rows == out.Rows());
  REQUIRE(cols == out.Cols());
  double worst = 0.0;
  for (size_t i = 0; i < out.Size(); ++i) {
    double v;
    is >> v;
    worst = std::max(worst, std::abs(v - out[i]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("model gradients match finite differences") {
  for (bool group_norm : {false, true}) {
    AcousticModel model(TinyConfig(group_norm, group_norm), 31);
    Tensor wav = WaveformTensor(Noise(8, 24));
    Rng rng(5);
    Tensor target = Tensor::Zeros({6, 3});
    for (size_t i = 0; i < target.Size(); ++i) target[i] = rng.Uniform(-1, 1);
    std::vector<Tensor> params;
    for (int i = 0; i < model.NumParams(); ++i) {
      Tensor p = model.Param(i);
      // Move gains and zero biases off their initial values.
      for (size_t j = 0; j < p.Size(); ++j) p[j] += rng.Uniform(-0.2, 0.2);
      params.push_back(p);
    }
    auto mask = std::make_shared<AttentionMask>(36, 1);
    (*mask)[1] = 0;
    (*mask)[2 * 6 + 5] = 0;
    ScalarFunction fn = [&](Tape& tape, std::span<const Var> vars) {
      BoundModel m(model, &tape, std::vector<Var>(vars.begin(), vars.end()));
      ModelOutputs out = Forward(m, wav, mask);
      return Add(MseReduce(out.output, tape.Constant(target)),
                 Scale(MseReduce(out.hiddens[0], tape.Constant(Tensor::Zeros({6, 8}))), 0.1));
    };
    // Two-channel groups make the norm sharply curved; a smaller step keeps
    // the central-difference truncation error (O(eps^2)) below tolerance.
    GradCheckResult r = GradCheckDetailed(fn, params, 1e-6);
    INFO("group_norm=" << group_norm << " worst param " << model.ParamName(r.worst_param));
    CHECK(r.max_rel_error <= 1e-6);
  }
}

TEST_CASE("teacher parameter sharing") {
  const int m = 6;
  AcousticModel teacher(DeskModelConfig("T", m), 100);

  SUBCASE("matching shapes copy the CNN and prediction layer") {
    ModelConfig sc = DeskModelConfig("T", m);
    AcousticModel student = ShareTeacherParams(teacher, sc, 200);
    AcousticModel fresh(sc, 200);
    for (int i = 0; i < student.NumParams(); ++i) {
      const std::string& name = student.ParamName(i);
      bool shared = name.rfind("cnn", 0) == 0 || name.rfind("pred.", 0) == 0;
      const Tensor& expect = shared ? teacher.Param(name) : fresh.Param(name);
      INFO(name);
      CHECK(student.Param(i).BitwiseEqual(expect));
    }
  }

  SUBCASE("narrow first two layers: later layers copied, layer 3 sliced") {
    ModelConfig sc = DeskModelConfig("S5", m);
    AcousticModel student = ShareTeacherParams(teacher, sc, 200);
    AcousticModel fresh(sc, 200);
    for (const char* what : {"weight", "bias", "norm_gain", "norm_bias"}) {
      std::string n1 = std::string("cnn1.") + what, n2 = std::string("cnn2.") + what;
      CHECK(student.Param(n1).BitwiseEqual(fresh.Param(n1)));
      CHECK(student.Param(n2).BitwiseEqual(fresh.Param(n2)));
      std::string n4 = std::string("cnn4.") + what;
      CHECK(student.Param(n4).BitwiseEqual(teacher.Param(n4)));
    }
    for (const char* what : {"bias", "norm_gain", "norm_bias"}) {
      std::string n3 = std::string("cnn3.") + what;
      CHECK(student.Param(n3).BitwiseEqual(teacher.Param(n3)));
    }
    const Tensor& sw = student.Param("cnn3.weight");
    const Tensor& tw = teacher.Param("cnn3.weight");
    REQUIRE(sw.Rows() == 8 * 8);
    REQUIRE(tw.Rows() == 8 * 16);
    bool same = true;
    for (int k = 0; k < 8; ++k)
      for (int ch = 0; ch < 8; ++ch)
        for (int o = 0; o < 16; ++o) same = same && sw(k * 8 + ch, o) == tw(k * 16 + ch, o);
    CHECK(same);
    // d differs (24 vs 64): prediction layer is fresh.
    CHECK(student.Param("pred.weight").BitwiseEqual(fresh.Param("pred.weight")));
    CHECK(student.Param("proj.weight").BitwiseEqual(fresh.Param("proj.weight")));
  }

  SUBCASE("pdf count mismatch is rejected") {
    CHECK_THROWS_AS(ShareTeacherParams(teacher, DeskModelConfig("S1", m + 1), 1),
                    std::invalid_argument);
    ModelConfig bad = DeskModelConfig("S1", m);
    bad.cnn_strides = {5, 4, 2, 4};
    bad.cnn_kernels = {10, 8, 4, 8};
    CHECK_THROWS_AS(ShareTeacherParams(teacher, bad, 1), std::invalid_argument);
  }

  SUBCASE("streaming student starts as an exact copy") {
    AcousticModel sn(DeskModelConfig("S5", m), 9);
    CHECK(InitStreamingFrom(sn).BitwiseEqual(sn));
  }
}

TEST_CASE("checkpoint round trip is bit-exact") {
  AcousticModel model(DeskModelConfig("S5", 4), 17);
  std::string path = "/tmp/seqdistill-model-test.ckpt";
  model.Save(path);
  AcousticModel loaded = AcousticModel::Load(path);
  CHECK(loaded.BitwiseEqual(model));
  std::remove(path.c_str());

  std::string bytes = model.Serialize();
  CHECK(AcousticModel::Deserialize(bytes).BitwiseEqual(model));
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS(AcousticModel::Deserialize(bad));
  CHECK_THROWS(AcousticModel::Deserialize(bytes.substr(0, bytes.size() - 3)));
  CHECK_THROWS(AcousticModel::Deserialize(bytes + "z"));
  CHECK_THROWS(AcousticModel::Load("/nonexistent/model.ckpt"));
}
