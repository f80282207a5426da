// src/pipeline/experiment-config.h

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

#ifndef SEQDISTILL_PIPELINE_EXPERIMENT_CONFIG_H_
#define SEQDISTILL_PIPELINE_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "data/toy-task.h"
#include "fst/graph-builder.h"
#include "lfmmi/distill-loss.h"
#include "model/model-config.h"
#include "stream/chunk-stream.h"
#include "train/trainer.h"

namespace seqdistill {

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
  std::vector<std::string> commands;  // commands that read the key; empty = all
};

// Every key in documentation order.
const std::vector<ConfigKey>& ConfigKeys();
// Keys read by `command`, including the ones every command reads.
std::vector<ConfigKey> KeysForCommand(const std::string& command);

/// Flat key=value experiment description. Every key has a default; setting
/// an unknown key or a value of the wrong type throws ConfigError.
class ExperimentConfig {
 public:
  ExperimentConfig();

  void Set(const std::string& key, const std::string& value);
  // "key=value" lines; blank lines and lines starting with '#' are ignored.
  void Merge(const std::string& text, const std::string& origin);
  static ExperimentConfig FromFile(const std::string& path);

  const std::string& Get(const std::string& key) const;
  int GetInt(const std::string& key) const;
  uint64_t GetU64(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  bool GetBool(const std::string& key) const;

  // All keys in documentation order.
  std::string ToText() const;
  // Only the keys read by `command`, in documentation order.
  std::string TextForCommand(const std::string& command) const;

  // Checks every value and the cross-key constraints; throws ConfigError.
  void Validate() const;

  // Typed views.
  uint64_t Seed() const { return GetU64("seed"); }
  std::string OutDir() const { return Get("out"); }
  ToyTaskOptions TaskOptions() const;
  DenominatorOptions DenOptions() const;
  DecodingGraphOptions DecodeOptions() const;
  ModelConfig TeacherModel(int num_pdfs) const;
  ModelConfig StudentModel(int num_pdfs) const;
  ModelConfig ModelByName(const std::string& name, int num_pdfs) const;
  ChunkSpec StreamingSpec() const;
  ObjectiveWeights Weights() const;
  PseudoLabelOptions PseudoOptions() const;
  TrainOptions TeacherTrainOptions() const;
  // `stage` is "distill1" or "distill2"; the single-step baseline uses the
  // distill2 budget.
  TrainOptions DistillTrainOptions(const std::string& stage) const;
  LayerMap StudentLayerMap(int student_blocks, int teacher_blocks) const;

 private:
  TrainOptions CommonTrainOptions() const;
  std::map<std::string, std::string> values_;
};

// Layer pairs for a student with fewer blocks than half the teacher: the
// half-depth map (i, 2i) with evenly spaced student layers removed and the
// rest renumbered; the plain half-depth map when depths allow it.
LayerMap AutoLayerMap(int student_blocks, int teacher_blocks);

// "1:2,2:6,3:8" form; throws ConfigError on malformed text.
LayerMap ParseLayerMap(const std::string& text);
std::string LayerMapToString(const LayerMap& map);

}  // namespace seqdistill

#endif  // SEQDISTILL_PIPELINE_EXPERIMENT_CONFIG_H_
