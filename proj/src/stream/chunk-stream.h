// src/stream/chunk-stream.h

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

#ifndef SEQDISTILL_STREAM_CHUNK_STREAM_H_
#define SEQDISTILL_STREAM_CHUNK_STREAM_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "model/acoustic-model.h"

namespace seqdistill {

inline constexpr int kInfiniteFrames = -1;

/// History and chunk sizes in frames; kInfiniteFrames stands for "+inf".
struct ChunkSpec {
  int hist_frames = kInfiniteFrames;
  int chunk_frames = kInfiniteFrames;
  double frame_duration_ms = 20.0;

  static ChunkSpec Full(double frame_ms = 20.0) { return {kInfiniteFrames, kInfiniteFrames, frame_ms}; }
  bool HistInfinite() const { return hist_frames == kInfiniteFrames; }
  bool ChunkInfinite() const { return chunk_frames == kInfiniteFrames; }
  // Every frame sees every other frame.
  bool IsFullContext() const { return ChunkInfinite(); }
  void Validate() const;
  // "(hist,chunk)" with "inf" for infinite sizes.
  std::string ToString() const;
};

// Parses "inf" or a non-negative integer.
int ParseFrames(const std::string& text);

// [T x T] mask: frame t of chunk c attends to chunk c and the hist_frames
// frames before the chunk start.
AttentionMask BuildChunkMask(int total_frames, const ChunkSpec& spec);

// Mean wait for future audio: chunk_frames * frame_duration_ms / 2. Throws
// std::invalid_argument ("non-streaming") for an infinite chunk.
double AvgLookaheadMs(const ChunkSpec& spec);

// Forward under `spec`. With stop_history_gradient the history frames each
// chunk attends to are fed to the block as constants, so gradients do not
// cross chunk boundaries; values equal the masked full-sequence forward.
ModelOutputs ChunkedForward(const BoundModel& m, const Tensor& waveform, const ChunkSpec& spec,
                            bool stop_history_gradient);

/// Random-access audio for streaming inference.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual int64_t NumSamples() const = 0;
  virtual void Read(int64_t begin, std::span<float> out) = 0;
};

class VectorSource : public SampleSource {
 public:
  explicit VectorSource(std::span<const float> samples) : samples_(samples) {}
  int64_t NumSamples() const override { return static_cast<int64_t>(samples_.size()); }
  void Read(int64_t begin, std::span<float> out) override;

 private:
  std::span<const float> samples_;
};

/// Incremental inference over a causal-CNN model: CNN layers keep their
/// left context, each block keeps at most hist_frames of its own inputs.
class StreamSession {
 public:
  StreamSession(const AcousticModel& model, const ChunkSpec& spec);

  // Consumes a whole number of frames of audio (at most one chunk) and
  // returns their [n x m] outputs.
  Tensor ProcessChunk(std::span<const float> samples);

  // Largest number of frames any block held while attending (cache plus
  // current chunk).
  int PeakRetainedFrames() const { return peak_retained_; }

 private:
  const AcousticModel& model_;
  ChunkSpec spec_;
  std::vector<Tensor> cnn_context_;    // per layer: last (kernel - stride) input rows
  std::vector<Tensor> block_history_;  // per block: cached input frames
  int peak_retained_ = 0;
};

// Streams `source` chunk by chunk. `on_chunk(index, output, samples_read)`
// fires as each chunk is emitted, with the number of samples read so far.
// Returns the concatenated [l x m] output, l = floor(N / stride).
Tensor StreamInfer(const AcousticModel& model, SampleSource* source, const ChunkSpec& spec,
                   const std::function<void(int, const Tensor&, int64_t)>& on_chunk = nullptr);

}  // namespace seqdistill

#endif  // SEQDISTILL_STREAM_CHUNK_STREAM_H_
