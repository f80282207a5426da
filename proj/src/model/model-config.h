// src/model/model-config.h

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

#ifndef SEQDISTILL_MODEL_MODEL_CONFIG_H_
#define SEQDISTILL_MODEL_MODEL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

namespace seqdistill {

/// Shape of a CNN + transformer acoustic model. The CNN has one layer per
/// entry of `cnn_kernels`; the first two layers use cnn_channels_first_two
/// output channels, the rest cnn_channels_rest.
struct ModelConfig {
  int sample_rate = 8000;
  std::vector<int> cnn_kernels = {10, 8, 8, 4};
  std::vector<int> cnn_strides = {5, 4, 4, 2};
  int cnn_channels_first_two = 16;
  int cnn_channels_rest = 16;
  bool causal_cnn = false;
  // Per-frame group norm with `norm_groups` groups instead of layer norm.
  bool group_norm = false;
  int norm_groups = 4;
  int encoder_dim = 64;
  int ffn_dim = 256;
  int blocks = 8;
  int heads = 4;
  int num_pdfs = 0;

  int CnnLayers() const { return static_cast<int>(cnn_kernels.size()); }
  int CnnChannels(int layer) const {
    return layer < 2 ? cnn_channels_first_two : cnn_channels_rest;
  }
  // Samples per output frame.
  int TotalStride() const;
  double FrameDurationMs() const;
  // Input samples the CNN reads to the left of frame t's own stride block.
  int ReceptiveFieldLeft() const;

  // Throws std::invalid_argument describing the first violated constraint.
  void Validate() const;

  // "key=value" lines; FromText rejects unknown keys.
  std::string ToText() const;
  static ModelConfig FromText(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

// Analytic number of trainable scalars of a model with this config.
int64_t ParamCount(const ModelConfig& config);

// Desk-scale ladder "T", "S1".."S5": teacher d=64/ffn=256/8 blocks, students
// shrinking with the same ratios (S3..S5 at 0.375 d, S4/S5 with fewer
// blocks, S5 with half the channels in the first two CNN layers).
// Students use group norm and a causal CNN.
ModelConfig DeskModelConfig(const std::string& name, int num_pdfs);

}  // namespace seqdistill

#endif  // SEQDISTILL_MODEL_MODEL_CONFIG_H_
