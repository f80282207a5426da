// src/model/acoustic-model.h

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

#ifndef SEQDISTILL_MODEL_ACOUSTIC_MODEL_H_
#define SEQDISTILL_MODEL_ACOUSTIC_MODEL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "autodiff/tape.h"
#include "model/model-config.h"

namespace seqdistill {

// Row-major [T_query x T_context] attention permission, 1 = may attend.
using AttentionMask = std::vector<uint8_t>;

/// Parameters of a CNN encoder, input projection, pre-norm transformer
/// blocks and linear prediction layer, stored as named tensors in a fixed
/// order.
class AcousticModel {
 public:
  // Uniform +-1/sqrt(fan_in) weights, zero biases, unit norm gains.
  AcousticModel(const ModelConfig& config, uint64_t seed);

  const ModelConfig& Config() const { return config_; }
  int NumParams() const { return static_cast<int>(params_.size()); }
  const std::string& ParamName(int i) const { return names_[i]; }
  const Tensor& Param(int i) const { return params_[i]; }
  Tensor& MutableParam(int i) { return params_[i]; }
  // Index of a named parameter; throws std::out_of_range if absent.
  int ParamIndex(const std::string& name) const;
  const Tensor& Param(const std::string& name) const { return params_[ParamIndex(name)]; }
  Tensor& MutableParam(const std::string& name) { return params_[ParamIndex(name)]; }
  int64_t NumScalars() const;

  bool BitwiseEqual(const AcousticModel& other) const;

  // Binary container: magic, version, config text, named tensors.
  void Save(const std::string& path) const;
  static AcousticModel Load(const std::string& path);
  std::string Serialize() const;
  static AcousticModel Deserialize(const std::string& bytes);

 private:
  AcousticModel() = default;
  void Add(const std::string& name, Tensor value);

  ModelConfig config_;
  std::vector<std::string> names_;
  std::vector<Tensor> params_;
  std::map<std::string, int> index_;
};

/// Parameters of one model placed on a tape, either as trainable variables
/// (gradient ids id_offset + parameter index) or as constants.
class BoundModel {
 public:
  BoundModel(const AcousticModel& model, Tape* tape, bool trainable, int id_offset = 0);
  // Uses caller-made handles, one per parameter of `model` in order.
  BoundModel(const AcousticModel& model, Tape* tape, std::vector<Var> vars);

  const AcousticModel& Model() const { return *model_; }
  const ModelConfig& Config() const { return model_->Config(); }
  Tape* GetTape() const { return tape_; }
  Var operator[](const std::string& name) const { return vars_[model_->ParamIndex(name)]; }
  Var At(int index) const { return vars_[index]; }

 private:
  const AcousticModel* model_;
  Tape* tape_;
  std::vector<Var> vars_;
};

// [N x 1] tensor of samples.
Tensor WaveformTensor(std::span<const float> samples);

// One CNN layer (conv, per-frame norm, GELU) on [T_in x C_in] input.
// `shift` overrides the alignment given by the config (see Conv1d).
Var CnnLayer(const BoundModel& m, int layer, Var x, int shift);
int CnnShift(const ModelConfig& config, int layer);

// Strided CNN over [N x 1] samples: [floor(N / stride) x cnn_channels_rest].
// Throws std::invalid_argument when N is shorter than one frame.
Var CnnEncode(const BoundModel& m, Var waveform);
// CNN features to encoder width.
Var InputProjection(const BoundModel& m, Var features);

// Pre-norm block `block` (0-based): queries from x_query attend over
// x_context, masked by `mask` ([rows(x_query) x rows(x_context)], null for
// no restriction).
Var TransformerBlock(const BoundModel& m, int block, Var x_query, Var x_context,
                     const std::shared_ptr<const AttentionMask>& mask);
Var PredictionLayer(const BoundModel& m, Var hidden);

struct ModelOutputs {
  std::vector<Var> hiddens;  // one [l x d] output per block
  Var output;                // [l x m]
};

// Full-sequence forward; `mask` is [l x l] or null for full context.
ModelOutputs Forward(const BoundModel& m, const Tensor& waveform,
                     const std::shared_ptr<const AttentionMask>& mask = nullptr);

// Inference convenience: values only.
struct ModelValues {
  std::vector<Tensor> hiddens;
  Tensor output;
};
ModelValues RunModel(const AcousticModel& model, const Tensor& waveform,
                     const std::shared_ptr<const AttentionMask>& mask = nullptr);

// Student initialized from a teacher: CNN layers from the third on copied
// (sliced over input channels where the previous layer is narrower), the
// first two copied only when their channel counts match, the prediction
// layer copied only when encoder widths match; everything else fresh from
// `seed`. Throws std::invalid_argument when num_pdfs differ or the CNN
// layouts are incompatible.
AcousticModel ShareTeacherParams(const AcousticModel& teacher, const ModelConfig& student_config,
                                 uint64_t seed);

// Parameter-for-parameter copy used to start the streaming student.
AcousticModel InitStreamingFrom(const AcousticModel& non_streaming);

}  // namespace seqdistill

#endif  // SEQDISTILL_MODEL_ACOUSTIC_MODEL_H_
