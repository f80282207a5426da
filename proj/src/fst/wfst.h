// src/fst/wfst.h

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

#ifndef SEQDISTILL_FST_WFST_H_
#define SEQDISTILL_FST_WFST_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace seqdistill {

using StateId = int;
using Label = int;

// Label 0 is epsilon on both tapes. Input labels are 1-based pdf-ids: the
// arc with ilabel k reads column k-1 of a [T x m] log-likelihood matrix.
inline constexpr Label kEpsilon = 0;

inline int PdfColumn(Label ilabel) { return ilabel - 1; }

struct Arc {
  StateId src;
  StateId dst;
  Label ilabel;
  Label olabel;
  double weight;  // log-probability
};

/// Weighted acceptor over pdf-ids with word output labels. State 0 is the
/// start state. Weights are log-probabilities (higher is better).
class Wfst {
 public:
  Wfst() = default;

  StateId AddState() { return num_states_++; }
  void AddArc(StateId src, StateId dst, Label ilabel, Label olabel, double weight);
  void SetFinal(StateId state, double weight);

  int NumStates() const { return num_states_; }
  StateId Start() const { return 0; }
  const std::vector<Arc>& Arcs() const { return arcs_; }
  const std::map<StateId, double>& Finals() const { return finals_; }
  bool IsFinal(StateId s) const { return finals_.count(s) != 0; }
  // kLogZero for non-final states.
  double FinalWeight(StateId s) const;

  Label MaxInputLabel() const;
  bool HasEpsilonInput() const;
  // Every state lies on some start -> final path.
  bool IsTrimmed() const;
  // Copy restricted to accessible and coaccessible states; relative order of
  // surviving states and arcs is kept.
  Wfst Trimmed() const;

  // Throws std::invalid_argument if an arc endpoint is out of range or a
  // weight is not finite.
  void Validate() const;

  // Per-state list of outgoing arc indices into Arcs().
  std::vector<std::vector<int>> OutArcs() const;

  // Text form: "src dst ilabel olabel weight" per arc, then "state weight"
  // per final state. Weights use the shortest round-trip decimal form.
  void Write(std::ostream& os) const;
  static Wfst Read(std::istream& is);
  void WriteFile(const std::string& path) const;
  static Wfst ReadFile(const std::string& path);

  bool operator==(const Wfst& other) const;

 private:
  int num_states_ = 0;
  std::vector<Arc> arcs_;
  std::map<StateId, double> finals_;
};

// Shortest decimal string that parses back to exactly `value`.
std::string FormatDouble(double value);
double ParseDouble(const std::string& text);

}  // namespace seqdistill

#endif  // SEQDISTILL_FST_WFST_H_
