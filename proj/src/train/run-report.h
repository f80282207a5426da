// src/train/run-report.h

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

#ifndef SEQDISTILL_TRAIN_RUN_REPORT_H_
#define SEQDISTILL_TRAIN_RUN_REPORT_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace seqdistill {

struct StepRecord {
  int step = 0;  // 1-based optimizer step
  double lr = 0.0;
  double total = 0.0;
  std::optional<double> hidden;  // absent when the term has zero weight
  std::optional<double> pred;
};

/// Per-step trace plus summary entries. Wall-clock time is kept apart from
/// the deterministic content so reruns produce identical report files.
struct RunReport {
  std::vector<StepRecord> steps;
  std::vector<std::pair<std::string, std::string>> summary;
  double wall_clock_s = 0.0;

  void AddSummary(const std::string& key, const std::string& value);
  void AddSummary(const std::string& key, double value);
  // "" when absent.
  std::string Summary(const std::string& key) const;

  // "step,lr,total,hidden,pred" header, one row per step; absent terms are
  // empty fields. Numbers use shortest round-trip formatting.
  std::string Csv() const;
  // "key=value" lines.
  std::string SummaryText() const;
  // Writes <prefix>.csv, <prefix>.summary and <prefix>.time.
  void Write(const std::string& prefix) const;
};

}  // namespace seqdistill

#endif  // SEQDISTILL_TRAIN_RUN_REPORT_H_
