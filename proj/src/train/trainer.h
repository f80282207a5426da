// src/train/trainer.h

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

#ifndef SEQDISTILL_TRAIN_TRAINER_H_
#define SEQDISTILL_TRAIN_TRAINER_H_

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "data/toy-task.h"
#include "fst/wfst.h"
#include "lfmmi/distill-loss.h"
#include "model/acoustic-model.h"
#include "stream/chunk-stream.h"
#include "train/run-report.h"
#include "train/schedule.h"
#include "train/wer.h"

namespace seqdistill {

/// Settings shared by every training driver. One optimizer step averages
/// the gradients of `accumulate` utterances taken in a seeded per-epoch
/// order.
struct TrainOptions {
  int epochs = 30;
  double peak_lr = 5e-4;
  double warmup_frac = 0.10;
  double hold_frac = 0.40;
  double final_scale = 0.05;
  int accumulate = 8;
  AdamOptions adam;
  bool augment = true;
  AugmentOptions augment_opts;
  // Divide each utterance's MMI term by its frame count.
  bool normalize_mmi_by_frames = true;
  uint64_t seed = 1;
  std::ostream* log = nullptr;  // warnings and progress; null for silence
  std::function<void(int epoch, const AcousticModel&)> on_epoch;

  void Validate() const;
  int StepsPerEpoch(int num_utterances) const;
  TriStateSchedule Schedule(int num_utterances) const;
};

struct TeacherResult {
  AcousticModel model;
  RunReport report;
  int skipped = 0;  // utterances whose transcript does not fit their frames
};

// Full-context model trained from scratch on the labeled set with negated
// MMI against transcript numerators. Throws when every utterance is skipped.
TeacherResult TrainTeacher(const std::vector<Utterance>& labeled, const Lexicon& lexicon,
                           const ModelConfig& config, const Wfst& den, const TrainOptions& opts);

struct PseudoLabelOptions {
  int nbest = 4;
  double beam = 10.0;
};

// Numerator from the n-best paths of `loglikes` through `den`, weighted by
// graph scores only.
Wfst PseudoNumerator(const Tensor& loglikes, const Wfst& den, const PseudoLabelOptions& opts);

struct PseudoSupervision {
  std::map<std::string, Wfst> numerators;  // by utterance id
  int skipped = 0;
};

// Teacher (full context) decodes every utterance against `den`.
PseudoSupervision MakePseudoSupervision(const AcousticModel& teacher,
                                        const std::vector<Utterance>& utterances, const Wfst& den,
                                        const PseudoLabelOptions& opts, std::ostream* log = nullptr);
// One <id>.fst per utterance plus index.txt listing the ids in order.
void SavePseudoSupervision(const PseudoSupervision& sup, const std::string& dir);
PseudoSupervision LoadPseudoSupervision(const std::string& dir);

struct DistillConfig {
  ObjectiveWeights weights;
  TrainOptions train;
  LayerMap layer_map;
  ChunkSpec chunk = ChunkSpec::Full();  // student attention during training
  bool stop_history_gradient = true;
  bool mse_on_log_softmax = false;
  // Augmented audio changes length, so its supervision is decoded from
  // the teacher's output on that audio.
  PseudoLabelOptions relabel;
  void Validate(const ModelConfig& teacher, const ModelConfig& student) const;
};

struct DistillResult {
  AcousticModel student;
  std::vector<Tensor> projections;  // one per layer pair
  RunReport report;
};

// Trains `student` to follow the frozen full-context `teacher` on
// `utterances` under cfg.chunk. Projections start from `projections` when
// given, otherwise from the seed. Zero epochs return the inputs unchanged.
DistillResult DistillStep(const AcousticModel& teacher, const AcousticModel& student,
                          const PseudoSupervision& supervision,
                          const std::vector<Utterance>& utterances, const Wfst& den,
                          const DistillConfig& cfg,
                          const std::vector<Tensor>* projections = nullptr);

// Model output for one waveform with attention restricted by `spec`.
Tensor ModelOutput(const AcousticModel& model, std::span<const float> samples,
                   const ChunkSpec& spec);

// Viterbi-decodes each utterance through `graph` and scores its word
// sequence. Throws on an empty test set or untranscribed utterances.
double EvaluateWer(const AcousticModel& model, const std::vector<Utterance>& test,
                   const Wfst& graph, const ChunkSpec& spec, WerAccumulator* details = nullptr);

// Single-threaded inference time over audio duration, median over `runs`
// passes; streaming specs go through StreamInfer. Within a pass the
// models take turns on each utterance. Requires at least 10 s of audio.
std::vector<double> BenchRtf(const std::vector<const AcousticModel*>& models,
                             const std::vector<Utterance>& utterances, const ChunkSpec& spec,
                             int sample_rate, int runs = 3);

}  // namespace seqdistill

#endif  // SEQDISTILL_TRAIN_TRAINER_H_
