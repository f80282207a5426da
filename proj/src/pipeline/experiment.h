// src/pipeline/experiment.h

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

#ifndef SEQDISTILL_PIPELINE_EXPERIMENT_H_
#define SEQDISTILL_PIPELINE_EXPERIMENT_H_

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pipeline/experiment-config.h"
#include "pipeline/objective-check.h"
#include "train/trainer.h"

namespace seqdistill {

// A stage ran before one of its inputs was produced (or after the input
// was produced under a different configuration).
class MissingDependencyError : public std::runtime_error {
 public:
  MissingDependencyError(const std::string& stage, const std::string& detail)
      : std::runtime_error(detail), stage_(stage) {}
  const std::string& Stage() const { return stage_; }

 private:
  std::string stage_;
};

// Stage names in pipeline order; also the CLI command names.
const std::vector<std::string>& StageNames();
// Stages whose outputs `stage` reads.
const std::vector<std::string>& StageInputs(const std::string& stage);

struct AblationRow {
  std::string name;
  double alpha = 0.0;
  double beta = 0.0;
  double wer = 0.0;
};

struct RtfRow {
  std::string model;
  int64_t params = 0;
  double rtf = 0.0;
};

struct WerRow {
  std::string model;
  std::string spec;
  double wer = 0.0;
};

/// One experiment directory. Each stage reads its inputs from disk, writes
/// its outputs under <out>/<stage>/ and finally a `stamp` file hashing the
/// configuration it used together with its inputs' stamps. A stage whose
/// input stamp is absent or differs from the current configuration's
/// throws MissingDependencyError. Outputs are a pure function of the
/// configuration except wall-clock files (*.time) and RTF measurements.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config, std::ostream* log = nullptr);

  const ExperimentConfig& Config() const { return config_; }
  std::string StageDir(const std::string& stage) const;
  // Hash of the configuration keys `stage` reads and its inputs' stamps.
  std::string ExpectedStamp(const std::string& stage) const;
  bool IsFresh(const std::string& stage) const;

  void GenData();
  void BuildDen();
  RunReport TrainTeacher();
  int PseudoLabel();  // returns the number of skipped utterances
  RunReport Distill1();
  RunReport Distill2();
  RunReport SingleStep();
  std::vector<AblationRow> Ablate();
  std::vector<WerRow> Eval();
  std::vector<RtfRow> BenchRtf();
  ObjectiveCheckReport GradCheck();

  // Runs the named stage.
  void Run(const std::string& stage);

 private:
  void RequireInputs(const std::string& stage) const;
  void BeginStage(const std::string& stage) const;
  void FinishStage(const std::string& stage) const;
  RunReport RunDistill(const std::string& stage, const ExperimentConfig& cfg,
                       const std::string& dir);

  ExperimentConfig config_;
  std::ostream* log_;
};

// Projection matrices as text: count, then per matrix "rows cols" and the
// values in shortest round-trip form.
void SaveTensors(const std::vector<Tensor>& tensors, const std::string& path);
std::vector<Tensor> LoadTensors(const std::string& path);

}  // namespace seqdistill

#endif  // SEQDISTILL_PIPELINE_EXPERIMENT_H_
