// src/model/model-config.cc

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

#include "model/model-config.h"

#include <sstream>

#include "base/error.h"

namespace seqdistill {

int ModelConfig::TotalStride() const {
  int s = 1;
  for (int v : cnn_strides) s *= v;
  return s;
}

double ModelConfig::FrameDurationMs() const {
  return 1000.0 * TotalStride() / sample_rate;
}

int ModelConfig::ReceptiveFieldLeft() const {
  // Each layer reaches (kernel - stride) inputs before its stride block;
  // express that in samples through the strides of the layers below it.
  int left = 0, below = 1;
  for (int i = 0; i < CnnLayers(); ++i) {
    left += (cnn_kernels[i] - cnn_strides[i]) * below;
    below *= cnn_strides[i];
  }
  return left;
}

void ModelConfig::Validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("model: sample_rate must be positive");
  if (cnn_kernels.empty() || cnn_kernels.size() != cnn_strides.size())
    throw std::invalid_argument("model: cnn_kernels and cnn_strides must be non-empty and equal length");
  for (int i = 0; i < CnnLayers(); ++i) {
    if (cnn_strides[i] < 1 || cnn_kernels[i] < cnn_strides[i])
      SEQDISTILL_THROW(std::invalid_argument, "model: cnn layer " << i + 1 << " needs kernel >= stride >= 1");
  }
  if (cnn_channels_first_two < 1 || cnn_channels_rest < 1)
    throw std::invalid_argument("model: cnn channels must be positive");
  if (group_norm) {
    if (norm_groups < 1 || cnn_channels_first_two % norm_groups || cnn_channels_rest % norm_groups)
      SEQDISTILL_THROW(std::invalid_argument, "model: channels not divisible into " << norm_groups
                                                                                    << " norm groups");
  }
  if (encoder_dim < 1 || ffn_dim < 1 || blocks < 0)
    throw std::invalid_argument("model: encoder_dim, ffn_dim must be positive, blocks >= 0");
  if (heads < 1 || encoder_dim % heads != 0)
    SEQDISTILL_THROW(std::invalid_argument, "model: " << heads << " heads do not divide encoder_dim "
                                                      << encoder_dim);
  if (num_pdfs < 1) throw std::invalid_argument("model: num_pdfs must be positive");
}

namespace {

std::string JoinInts(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

std::string ModelConfig::ToText() const {
  std::ostringstream os;
  os << "sample_rate=" << sample_rate << '\n'
     << "cnn_kernels=" << JoinInts(cnn_kernels) << '\n'
     << "cnn_strides=" << JoinInts(cnn_strides) << '\n'
     << "cnn_channels_first_two=" << cnn_channels_first_two << '\n'
     << "cnn_channels_rest=" << cnn_channels_rest << '\n'
     << "causal_cnn=" << (causal_cnn ? 1 : 0) << '\n'
     << "group_norm=" << (group_norm ? 1 : 0) << '\n'
     << "norm_groups=" << norm_groups << '\n'
     << "encoder_dim=" << encoder_dim << '\n'
     << "ffn_dim=" << ffn_dim << '\n'
     << "blocks=" << blocks << '\n'
     << "heads=" << heads << '\n'
     << "num_pdfs=" << num_pdfs << '\n';
  return os.str();
}

ModelConfig ModelConfig::FromText(const std::string& text) {
  ModelConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      SEQDISTILL_THROW(std::invalid_argument, "model config line '" << line << "' lacks '='");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    auto to_int = [&](const std::string& v) {
      try {
        size_t pos = 0;
        int x = std::stoi(v, &pos);
        if (pos == v.size()) return x;
      } catch (const std::logic_error&) {
      }
      SEQDISTILL_THROW(std::invalid_argument, "bad value for model config key '" << key
                                                  << "': " << value);
    };
    auto to_ints = [&](const std::string& v) {
      std::vector<int> out;
      std::istringstream parts(v);
      for (std::string tok; std::getline(parts, tok, ',');) out.push_back(to_int(tok));
      return out;
    };
    if (key == "sample_rate") c.sample_rate = to_int(value);
    else if (key == "cnn_kernels") c.cnn_kernels = to_ints(value);
    else if (key == "cnn_strides") c.cnn_strides = to_ints(value);
    else if (key == "cnn_channels_first_two") c.cnn_channels_first_two = to_int(value);
    else if (key == "cnn_channels_rest") c.cnn_channels_rest = to_int(value);
    else if (key == "causal_cnn") c.causal_cnn = to_int(value) != 0;
    else if (key == "group_norm") c.group_norm = to_int(value) != 0;
    else if (key == "norm_groups") c.norm_groups = to_int(value);
    else if (key == "encoder_dim") c.encoder_dim = to_int(value);
    else if (key == "ffn_dim") c.ffn_dim = to_int(value);
    else if (key == "blocks") c.blocks = to_int(value);
    else if (key == "heads") c.heads = to_int(value);
    else if (key == "num_pdfs") c.num_pdfs = to_int(value);
    else SEQDISTILL_THROW(std::invalid_argument, "unknown model config key '" << key << "'");
  }
  c.Validate();
  return c;
}

int64_t ParamCount(const ModelConfig& c) {
  int64_t n = 0;
  int c_in = 1;
  for (int i = 0; i < c.CnnLayers(); ++i) {
    int64_t c_out = c.CnnChannels(i);
    n += c.cnn_kernels[i] * c_in * c_out + 3 * c_out;  // weight, bias, norm gain and bias
    c_in = static_cast<int>(c_out);
  }
  int64_t d = c.encoder_dim, f = c.ffn_dim;
  n += c_in * d + d;                                         // input projection
  n += c.blocks * (4 * d + 4 * (d * d + d) + d * f + f + f * d + d);
  n += d * c.num_pdfs + c.num_pdfs;                          // prediction layer
  return n;
}

ModelConfig DeskModelConfig(const std::string& name, int num_pdfs) {
  ModelConfig c;
  c.num_pdfs = num_pdfs;
  if (name == "T") {
    c.Validate();
    return c;
  }
  c.causal_cnn = true;
  c.group_norm = true;
  if (name == "S1") {
    c.encoder_dim = 48, c.ffn_dim = 192, c.blocks = 4;
  } else if (name == "S2") {
    c.encoder_dim = 32, c.ffn_dim = 128, c.blocks = 4;
  } else if (name == "S3") {
    c.encoder_dim = 24, c.ffn_dim = 96, c.blocks = 4;
  } else if (name == "S4") {
    c.encoder_dim = 24, c.ffn_dim = 96, c.blocks = 3;
  } else if (name == "S5") {
    c.encoder_dim = 24, c.ffn_dim = 96, c.blocks = 3;
    c.cnn_channels_first_two = 8;
  } else {
    SEQDISTILL_THROW(std::invalid_argument, "unknown model name '" << name
                                                                   << "' (expected T, S1..S5)");
  }
  c.Validate();
  return c;
}

}  // namespace seqdistill
