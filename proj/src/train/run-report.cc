// src/train/run-report.cc

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

#include "train/run-report.h"

#include <fstream>
#include <sstream>

#include "base/error.h"
#include "fst/wfst.h"

namespace seqdistill {

void RunReport::AddSummary(const std::string& key, const std::string& value) {
  for (auto& [k, v] : summary)
    if (k == key) {
      v = value;
      return;
    }
  summary.emplace_back(key, value);
}

void RunReport::AddSummary(const std::string& key, double value) {
  AddSummary(key, FormatDouble(value));
}

std::string RunReport::Summary(const std::string& key) const {
  for (const auto& [k, v] : summary)
    if (k == key) return v;
  return "";
}

std::string RunReport::Csv() const {
  std::ostringstream os;
  os << "step,lr,total,hidden,pred\n";
  for (const StepRecord& r : steps) {
    os << r.step << ',' << FormatDouble(r.lr) << ',' << FormatDouble(r.total) << ',';
    if (r.hidden) os << FormatDouble(*r.hidden);
    os << ',';
    if (r.pred) os << FormatDouble(*r.pred);
    os << '\n';
  }
  return os.str();
}

std::string RunReport::SummaryText() const {
  std::ostringstream os;
  for (const auto& [k, v] : summary) os << k << '=' << v << '\n';
  return os.str();
}

void RunReport::Write(const std::string& prefix) const {
  auto put = [](const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path);
    os << text;
  };
  put(prefix + ".csv", Csv());
  put(prefix + ".summary", SummaryText());
  put(prefix + ".time", "wall_clock_s=" + FormatDouble(wall_clock_s) + "\n");
}

}  // namespace seqdistill
