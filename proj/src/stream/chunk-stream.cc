// src/stream/chunk-stream.cc

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

#include "stream/chunk-stream.h"

#include <algorithm>
#include <cstring>

#include "base/error.h"

namespace seqdistill {

void ChunkSpec::Validate() const {
  if (hist_frames < 0 && hist_frames != kInfiniteFrames)
    SEQDISTILL_THROW(std::invalid_argument, "history frames " << hist_frames << " must be >= 0");
  if (chunk_frames < 1 && chunk_frames != kInfiniteFrames)
    SEQDISTILL_THROW(std::invalid_argument, "chunk frames " << chunk_frames << " must be >= 1");
  if (!(frame_duration_ms > 0.0)) throw std::invalid_argument("frame duration must be positive");
}

std::string ChunkSpec::ToString() const {
  auto f = [](int v) { return v == kInfiniteFrames ? std::string("inf") : std::to_string(v); };
  return "(" + f(hist_frames) + "," + f(chunk_frames) + ")";
}

int ParseFrames(const std::string& text) {
  if (text == "inf") return kInfiniteFrames;
  size_t pos = 0;
  int v = -1;
  try {
    v = std::stoi(text, &pos);
  } catch (const std::logic_error&) {
    pos = 0;
  }
  if (pos != text.size() || v < 0)
    SEQDISTILL_THROW(std::invalid_argument, "frame count '" << text
                                                            << "' is not 'inf' or an integer >= 0");
  return v;
}

AttentionMask BuildChunkMask(int total_frames, const ChunkSpec& spec) {
  spec.Validate();
  if (total_frames < 1) throw std::invalid_argument("chunk mask needs at least one frame");
  const int T = total_frames;
  AttentionMask mask(static_cast<size_t>(T) * T, 0);
  const int chunk = spec.ChunkInfinite() ? T : spec.chunk_frames;
  for (int t = 0; t < T; ++t) {
    int start = (t / chunk) * chunk;
    int end = std::min(T, start + chunk);
    int from = spec.HistInfinite() ? 0 : std::max(0, start - spec.hist_frames);
    for (int j = from; j < end; ++j) mask[static_cast<size_t>(t) * T + j] = 1;
  }
  return mask;
}

double AvgLookaheadMs(const ChunkSpec& spec) {
  spec.Validate();
  if (spec.ChunkInfinite())
    throw std::invalid_argument("look-ahead of a non-streaming (infinite chunk) spec is undefined");
  return spec.chunk_frames * spec.frame_duration_ms / 2.0;
}

namespace {

Tensor Rows(const Tensor& x, int begin, int end) {
  Tensor out = Tensor::Zeros({end - begin, x.Cols()});
  std::memcpy(out.MutablePtr(), x.Ptr() + static_cast<size_t>(begin) * x.Cols(),
              out.Size() * sizeof(double));
  return out;
}

Tensor ConcatRows(const Tensor& a, const Tensor& b) {
  if (a.Size() == 0) return b;
  Tensor out = Tensor::Zeros({a.Rows() + b.Rows(), b.Cols()});
  std::memcpy(out.MutablePtr(), a.Ptr(), a.Size() * sizeof(double));
  std::memcpy(out.MutablePtr() + a.Size(), b.Ptr(), b.Size() * sizeof(double));
  return out;
}

}  // namespace

ModelOutputs ChunkedForward(const BoundModel& m, const Tensor& waveform, const ChunkSpec& spec,
                            bool stop_history_gradient) {
  spec.Validate();
  if (spec.IsFullContext()) return Forward(m, waveform);
  Tape* tape = m.GetTape();
  Var x = InputProjection(m, CnnEncode(m, tape->Constant(waveform)));
  const int l = x.value().Rows();
  ModelOutputs out;
  if (!stop_history_gradient) {
    auto mask = std::make_shared<const AttentionMask>(BuildChunkMask(l, spec));
    for (int b = 0; b < m.Config().blocks; ++b) {
      x = TransformerBlock(m, b, x, x, mask);
      out.hiddens.push_back(x);
    }
    out.output = PredictionLayer(m, x);
    return out;
  }
  const int chunk = spec.chunk_frames;
  for (int b = 0; b < m.Config().blocks; ++b) {
    std::vector<Var> parts;
    for (int start = 0; start < l; start += chunk) {
      int end = std::min(l, start + chunk);
      Var q = (start == 0 && end == l) ? x : Slice(x, 0, start, end);
      int from = spec.HistInfinite() ? 0 : std::max(0, start - spec.hist_frames);
      Var ctx = q;
      if (from < start) {
        Var hist = tape->Constant(Rows(x.value(), from, start));
        std::vector<Var> both = {hist, q};
        ctx = Concat(both, 0);
      }
      parts.push_back(TransformerBlock(m, b, q, ctx, nullptr));
    }
    x = parts.size() == 1 ? parts[0] : Concat(parts, 0);
    out.hiddens.push_back(x);
  }
  out.output = PredictionLayer(m, x);
  return out;
}

void VectorSource::Read(int64_t begin, std::span<float> out) {
  if (begin < 0 || begin + static_cast<int64_t>(out.size()) > NumSamples())
    throw std::out_of_range("sample read outside the waveform");
  std::copy_n(samples_.begin() + begin, out.size(), out.begin());
}

StreamSession::StreamSession(const AcousticModel& model, const ChunkSpec& spec)
    : model_(model), spec_(spec) {
  spec_.Validate();
  const ModelConfig& c = model.Config();
  if (!c.causal_cnn) throw std::invalid_argument("streaming needs a causal CNN");
  if (spec_.ChunkInfinite()) throw std::invalid_argument("streaming needs a finite chunk size");
  int c_in = 1;
  for (int i = 0; i < c.CnnLayers(); ++i) {
    cnn_context_.push_back(Tensor::Zeros({c.cnn_kernels[i] - c.cnn_strides[i], c_in}));
    c_in = c.CnnChannels(i);
  }
  block_history_.assign(c.blocks, Tensor::Zeros({0, c.encoder_dim}));
}

Tensor StreamSession::ProcessChunk(std::span<const float> samples) {
  const ModelConfig& c = model_.Config();
  const int stride = c.TotalStride();
  const int frames = static_cast<int>(samples.size()) / stride;
  if (frames < 1 || frames * stride != static_cast<int>(samples.size()) ||
      frames > spec_.chunk_frames)
    SEQDISTILL_THROW(std::invalid_argument, "stream chunk of " << samples.size()
                                                << " samples is not 1.." << spec_.chunk_frames
                                                << " whole frames");
  Tape tape;
  BoundModel m(model_, &tape, false);

  // CNN: each layer sees its saved left context followed by the new rows,
  // aligned so output t reads rows [t*s, t*s + kernel) of that buffer.
  Tensor x = WaveformTensor(samples);
  for (int i = 0; i < c.CnnLayers(); ++i) {
    const int k = c.cnn_kernels[i], s = c.cnn_strides[i];
    Tensor buffer = ConcatRows(cnn_context_[i], x);
    int n_out = x.Rows() / s;
    Var y = CnnLayer(m, i, tape.Constant(buffer), k - s);
    cnn_context_[i] = Rows(buffer, buffer.Rows() - (k - s), buffer.Rows());
    x = Rows(y.value(), 0, n_out);
  }
  Var h = InputProjection(m, tape.Constant(x));
  for (int b = 0; b < c.blocks; ++b) {
    Tensor context = ConcatRows(block_history_[b], h.value());
    peak_retained_ = std::max(peak_retained_, context.Rows());
    Var ctx = block_history_[b].Rows() == 0 ? h : tape.Constant(context);
    Var next = TransformerBlock(m, b, h, ctx, nullptr);
    int keep = spec_.HistInfinite() ? context.Rows() : std::min(spec_.hist_frames, context.Rows());
    block_history_[b] = Rows(context, context.Rows() - keep, context.Rows());
    h = next;
  }
  return PredictionLayer(m, h).value();
}

Tensor StreamInfer(const AcousticModel& model, SampleSource* source, const ChunkSpec& spec,
                   const std::function<void(int, const Tensor&, int64_t)>& on_chunk) {
  StreamSession session(model, spec);
  const int stride = model.Config().TotalStride();
  const int64_t total_frames = source->NumSamples() / stride;
  if (total_frames < 1)
    SEQDISTILL_THROW(std::invalid_argument, "waveform of " << source->NumSamples()
                                                << " samples is shorter than one frame");
  std::vector<Tensor> chunks;
  std::vector<float> buf;
  int64_t read = 0;
  int index = 0;
  for (int64_t f = 0; f < total_frames; f += spec.chunk_frames) {
    int64_t n = std::min<int64_t>(spec.chunk_frames, total_frames - f);
    buf.resize(n * stride);
    source->Read(f * stride, buf);
    read = (f + n) * stride;
    chunks.push_back(session.ProcessChunk(buf));
    if (on_chunk) on_chunk(index, chunks.back(), read);
    ++index;
  }
  Tensor out = Tensor::Zeros({static_cast<int>(total_frames), model.Config().num_pdfs});
  size_t offset = 0;
  for (const Tensor& c : chunks) {
    std::memcpy(out.MutablePtr() + offset, c.Ptr(), c.Size() * sizeof(double));
    offset += c.Size();
  }
  return out;
}

}  // namespace seqdistill
