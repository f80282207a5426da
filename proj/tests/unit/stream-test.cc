// tests/unit/stream-test.cc

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
#include <string>

#include "base/random.h"
#include "doctest.h"
#include "stream/chunk-stream.h"

using namespace seqdistill;

namespace {

std::vector<float> Noise(uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<float> w(n);
  for (float& x : w) x = static_cast<float>(0.3 * rng.Gaussian());
  return w;
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.SameShape(b));
  double m = 0.0;
  for (size_t i = 0; i < a.Size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ModelConfig SmallStreamingConfig() {
  ModelConfig c = DeskModelConfig("S5", 5);
  c.blocks = 2;
  return c;
}

// Records the furthest sample any Read() touched.
class TracingSource : public SampleSource {
 public:
  explicit TracingSource(std::span<const float> samples) : inner_(samples) {}
  int64_t NumSamples() const override { return inner_.NumSamples(); }
  void Read(int64_t begin, std::span<float> out) override {
    max_index_ = std::max(max_index_, begin + static_cast<int64_t>(out.size()) - 1);
    inner_.Read(begin, out);
  }
  int64_t MaxIndex() const { return max_index_; }

 private:
  VectorSource inner_;
  int64_t max_index_ = -1;
};

std::string MaskString(const AttentionMask& m, int T) {
  std::string s;
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < T; ++j) s += m[t * T + j] ? '1' : '.';
    s += '\n';
  }
  return s;
}

}  // namespace

TEST_CASE("chunk masks") {
  // Chunks {0,1} {2,3} {4,5}, two frames of history.
  CHECK(MaskString(BuildChunkMask(6, {2, 2}), 6) ==
        "11....\n"
        "11....\n"
        "1111..\n"
        "1111..\n"
        "..1111\n"
        "..1111\n");
  // Partial last chunk, one frame of history.
  CHECK(MaskString(BuildChunkMask(5, {1, 3}), 5) ==
        "111..\n"
        "111..\n"
        "111..\n"
        "..111\n"
        "..111\n");
  CHECK(MaskString(BuildChunkMask(3, {0, 1}), 3) == "1..\n.1.\n..1\n");
  CHECK(MaskString(BuildChunkMask(3, {kInfiniteFrames, 1}), 3) == "1..\n11.\n111\n");
  CHECK(MaskString(BuildChunkMask(3, ChunkSpec::Full()), 3) == "111\n111\n111\n");
  CHECK(MaskString(BuildChunkMask(3, {0, kInfiniteFrames}), 3) == "111\n111\n111\n");
  CHECK_THROWS_AS(BuildChunkMask(3, {-2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(BuildChunkMask(3, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(BuildChunkMask(0, {1, 1}), std::invalid_argument);
}

TEST_CASE("average look-ahead") {
  CHECK(AvgLookaheadMs({kInfiniteFrames, 16}) == 160.0);
  CHECK(AvgLookaheadMs({0, 1}) == 10.0);
  CHECK(AvgLookaheadMs({8, 4, 10.0}) == 20.0);
  try {
    AvgLookaheadMs(ChunkSpec::Full());
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("non-streaming") != std::string::npos);
  }
  CHECK(ParseFrames("inf") == kInfiniteFrames);
  CHECK(ParseFrames("12") == 12);
  CHECK_THROWS_AS(ParseFrames("-1"), std::invalid_argument);
  CHECK_THROWS_AS(ParseFrames("4x"), std::invalid_argument);
  CHECK(ChunkSpec{kInfiniteFrames, 16}.ToString() == "(inf,16)");
}

TEST_CASE("full-context chunk spec reproduces the plain forward") {
  AcousticModel model(SmallStreamingConfig(), 3);
  Tensor wav = WaveformTensor(Noise(1, 160 * 13));
  Tensor plain = RunModel(model, wav).output;
  auto mask = std::make_shared<const AttentionMask>(BuildChunkMask(13, ChunkSpec::Full()));
  CHECK(RunModel(model, wav, mask).output.BitwiseEqual(plain));
  Tape tape;
  BoundModel m(model, &tape, false);
  CHECK(ChunkedForward(m, wav, ChunkSpec::Full(), true).output.value().BitwiseEqual(plain));
  // A real chunking changes the outputs.
  auto chunked = std::make_shared<const AttentionMask>(BuildChunkMask(13, {2, 4}));
  CHECK(MaxAbsDiff(RunModel(model, wav, chunked).output, plain) > 1e-6);
}

TEST_CASE("chunked training forward") {
  AcousticModel model(SmallStreamingConfig(), 5);
  Tensor wav = WaveformTensor(Noise(2, 160 * 11 + 37));
  const int l = 11;
  for (ChunkSpec spec : {ChunkSpec{0, 3}, ChunkSpec{2, 3}, ChunkSpec{kInfiniteFrames, 4},
                         ChunkSpec{5, 1}}) {
    INFO(spec.ToString());
    auto mask = std::make_shared<const AttentionMask>(BuildChunkMask(l, spec));
    ModelValues ref = RunModel(model, wav, mask);
    for (bool stop : {false, true}) {
      Tape tape;
      BoundModel m(model, &tape, false);
      ModelOutputs out = ChunkedForward(m, wav, spec, stop);
      CHECK(MaxAbsDiff(out.output.value(), ref.output) <= 1e-12);
      for (size_t b = 0; b < ref.hiddens.size(); ++b)
        CHECK(MaxAbsDiff(out.hiddens[b].value(), ref.hiddens[b]) <= 1e-12);
    }
  }

  // Gradients of the loss on the last chunk's outputs.
  auto last_chunk_grads = [&](const ChunkSpec& spec, bool stop) {
    Tape tape;
    BoundModel m(model, &tape, true);
    ModelOutputs out = ChunkedForward(m, wav, spec, stop);
    Var tail = Slice(out.output, 0, 9, l);
    GradientMap g = tape.Backward(MseReduce(tail, tape.Constant(Tensor::Zeros({2, 5}))));
    return g;
  };
  auto max_diff = [&](const GradientMap& a, const GradientMap& b) {
    double d = 0.0;
    for (const auto& [id, t] : a) d = std::max(d, MaxAbsDiff(t, b.at(id)));
    return d;
  };
  // No history: nothing crosses a chunk boundary either way.
  CHECK(max_diff(last_chunk_grads({0, 3}, false), last_chunk_grads({0, 3}, true)) <= 1e-12);
  // With history, the stop-gradient version drops the path through earlier
  // chunks, so block parameters get different gradients.
  CHECK(max_diff(last_chunk_grads({3, 3}, false), last_chunk_grads({3, 3}, true)) > 1e-8);
}

TEST_CASE("streaming inference matches the chunk-masked forward") {
  AcousticModel model(SmallStreamingConfig(), 7);
  for (int n : {160 * 10, 160 * 10 + 159, 160 * 7 + 3}) {
    auto samples = Noise(static_cast<uint64_t>(n), n);
    const int l = n / 160;
    for (ChunkSpec spec : {ChunkSpec{0, 1}, ChunkSpec{2, 3}, ChunkSpec{kInfiniteFrames, 4},
                           ChunkSpec{4, 16}}) {
      INFO("n=" << n << " spec=" << spec.ToString());
      auto mask = std::make_shared<const AttentionMask>(BuildChunkMask(l, spec));
      Tensor ref = RunModel(model, WaveformTensor(samples), mask).output;
      TracingSource source(samples);
      int emitted = 0;
      bool reads_ok = true;
      Tensor streamed = StreamInfer(model, &source, spec, [&](int c, const Tensor& out,
                                                              int64_t read) {
        int64_t chunk_end = std::min<int64_t>(l, (c + 1) * int64_t{spec.chunk_frames}) * 160;
        reads_ok = reads_ok && source.MaxIndex() == chunk_end - 1 && read == chunk_end;
        reads_ok = reads_ok && out.Rows() == std::min(spec.chunk_frames, l - c * spec.chunk_frames);
        CHECK(c == emitted);
        ++emitted;
      });
      CHECK(reads_ok);
      CHECK(emitted == (l + spec.chunk_frames - 1) / spec.chunk_frames);
      CHECK(MaxAbsDiff(streamed, ref) <= 1e-9);
    }
  }
}

TEST_CASE("streaming session memory and preconditions") {
  AcousticModel model(SmallStreamingConfig(), 7);
  auto samples = Noise(5, 160 * 40);
  for (ChunkSpec spec : {ChunkSpec{0, 2}, ChunkSpec{6, 4}, ChunkSpec{3, 1}}) {
    StreamSession session(model, spec);
    for (int f = 0; f < 40; f += spec.chunk_frames)
      session.ProcessChunk(std::span<const float>(samples).subspan(f * 160, spec.chunk_frames * 160));
    CHECK(session.PeakRetainedFrames() == spec.hist_frames + spec.chunk_frames);
  }
  StreamSession session(model, {2, 2});
  CHECK_THROWS_AS(session.ProcessChunk(std::span<const float>(samples).subspan(0, 3 * 160)),
                  std::invalid_argument);
  CHECK_THROWS_AS(session.ProcessChunk(std::span<const float>(samples).subspan(0, 100)),
                  std::invalid_argument);
  AcousticModel teacher(DeskModelConfig("T", 5), 1);
  CHECK_THROWS_AS(StreamSession(teacher, {2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(StreamSession(model, ChunkSpec::Full()), std::invalid_argument);
  VectorSource tiny(std::span<const float>(samples).subspan(0, 100));
  CHECK_THROWS_AS(StreamInfer(model, &tiny, {2, 2}), std::invalid_argument);
}
