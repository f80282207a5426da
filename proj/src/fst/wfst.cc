// src/fst/wfst.cc

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

#include "fst/wfst.h"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "base/error.h"
#include "base/log-math.h"

namespace seqdistill {

std::string FormatDouble(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double ParseDouble(const std::string& text) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    SEQDISTILL_THROW(std::invalid_argument, "cannot parse number '" << text << "'");
  return value;
}

void Wfst::AddArc(StateId src, StateId dst, Label ilabel, Label olabel, double weight) {
  arcs_.push_back(Arc{src, dst, ilabel, olabel, weight});
}

void Wfst::SetFinal(StateId state, double weight) { finals_[state] = weight; }

double Wfst::FinalWeight(StateId s) const {
  auto it = finals_.find(s);
  return it == finals_.end() ? kLogZero : it->second;
}

Label Wfst::MaxInputLabel() const {
  Label m = 0;
  for (const Arc& a : arcs_) m = std::max(m, a.ilabel);
  return m;
}

bool Wfst::HasEpsilonInput() const {
  for (const Arc& a : arcs_)
    if (a.ilabel == kEpsilon) return true;
  return false;
}

std::vector<std::vector<int>> Wfst::OutArcs() const {
  std::vector<std::vector<int>> out(num_states_);
  for (size_t i = 0; i < arcs_.size(); ++i) out[arcs_[i].src].push_back(static_cast<int>(i));
  return out;
}

namespace {

// Marks states reachable from the start and states that reach a final.
void Connectivity(const Wfst& fst, std::vector<bool>* access, std::vector<bool>* coaccess) {
  int n = fst.NumStates();
  access->assign(n, false);
  coaccess->assign(n, false);
  if (n == 0) return;
  std::vector<std::vector<int>> fwd(n), bwd(n);
  for (const Arc& a : fst.Arcs()) {
    fwd[a.src].push_back(a.dst);
    bwd[a.dst].push_back(a.src);
  }
  std::vector<StateId> stack = {fst.Start()};
  (*access)[fst.Start()] = true;
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (StateId d : fwd[s])
      if (!(*access)[d]) {
        (*access)[d] = true;
        stack.push_back(d);
      }
  }
  for (const auto& [s, w] : fst.Finals()) {
    if (s >= 0 && s < n && !(*coaccess)[s]) {
      (*coaccess)[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    StateId s = stack.back();
    stack.pop_back();
    for (StateId p : bwd[s])
      if (!(*coaccess)[p]) {
        (*coaccess)[p] = true;
        stack.push_back(p);
      }
  }
}

}  // namespace

bool Wfst::IsTrimmed() const {
  if (num_states_ == 0) return false;
  std::vector<bool> access, coaccess;
  Connectivity(*this, &access, &coaccess);
  for (int s = 0; s < num_states_; ++s)
    if (!access[s] || !coaccess[s]) return false;
  return true;
}

Wfst Wfst::Trimmed() const {
  std::vector<bool> access, coaccess;
  Connectivity(*this, &access, &coaccess);
  Wfst out;
  if (num_states_ == 0 || !access[Start()] || !coaccess[Start()]) return out;
  std::vector<StateId> remap(num_states_, -1);
  for (int s = 0; s < num_states_; ++s)
    if (access[s] && coaccess[s]) remap[s] = out.AddState();
  for (const Arc& a : arcs_)
    if (remap[a.src] >= 0 && remap[a.dst] >= 0)
      out.AddArc(remap[a.src], remap[a.dst], a.ilabel, a.olabel, a.weight);
  for (const auto& [s, w] : finals_)
    if (remap[s] >= 0) out.SetFinal(remap[s], w);
  return out;
}

void Wfst::Validate() const {
  for (const Arc& a : arcs_) {
    if (a.src < 0 || a.src >= num_states_ || a.dst < 0 || a.dst >= num_states_)
      SEQDISTILL_THROW(std::invalid_argument, "arc " << a.src << "->" << a.dst
                                                     << " outside " << num_states_ << " states");
    if (!std::isfinite(a.weight))
      SEQDISTILL_THROW(std::invalid_argument, "arc " << a.src << "->" << a.dst
                                                     << " has non-finite weight");
    if (a.ilabel < 0 || a.olabel < 0) throw std::invalid_argument("negative arc label");
  }
  for (const auto& [s, w] : finals_) {
    if (s < 0 || s >= num_states_)
      SEQDISTILL_THROW(std::invalid_argument, "final state " << s << " out of range");
    if (!std::isfinite(w))
      SEQDISTILL_THROW(std::invalid_argument, "final state " << s << " has non-finite weight");
  }
}

void Wfst::Write(std::ostream& os) const {
  for (const Arc& a : arcs_)
    os << a.src << ' ' << a.dst << ' ' << a.ilabel << ' ' << a.olabel << ' '
       << FormatDouble(a.weight) << '\n';
  for (const auto& [s, w] : finals_) os << s << ' ' << FormatDouble(w) << '\n';
}

Wfst Wfst::Read(std::istream& is) {
  Wfst fst;
  std::string line;
  int max_state = 0;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    try {
      if (tok.size() == 5) {
        Arc a{std::stoi(tok[0]), std::stoi(tok[1]), std::stoi(tok[2]), std::stoi(tok[3]),
              ParseDouble(tok[4])};
        fst.arcs_.push_back(a);
        max_state = std::max({max_state, a.src, a.dst});
      } else if (tok.size() == 2) {
        StateId s = std::stoi(tok[0]);
        fst.finals_[s] = ParseDouble(tok[1]);
        max_state = std::max(max_state, s);
      } else {
        throw std::invalid_argument("expected 2 or 5 fields");
      }
    } catch (const std::exception& e) {
      SEQDISTILL_THROW(std::invalid_argument, "fst text line " << line_no << ": " << e.what());
    }
  }
  fst.num_states_ = max_state + 1;
  fst.Validate();
  return fst;
}

void Wfst::WriteFile(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path);
  Write(os);
}

Wfst Wfst::ReadFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) SEQDISTILL_THROW(std::runtime_error, "cannot read " << path);
  return Read(is);
}

bool Wfst::operator==(const Wfst& other) const {
  if (num_states_ != other.num_states_ || arcs_.size() != other.arcs_.size() ||
      finals_.size() != other.finals_.size())
    return false;
  for (size_t i = 0; i < arcs_.size(); ++i) {
    const Arc& a = arcs_[i];
    const Arc& b = other.arcs_[i];
    if (a.src != b.src || a.dst != b.dst || a.ilabel != b.ilabel || a.olabel != b.olabel ||
        std::memcmp(&a.weight, &b.weight, sizeof(double)) != 0)
      return false;
  }
  auto it = other.finals_.begin();
  for (const auto& [s, w] : finals_) {
    if (it->first != s || std::memcmp(&w, &it->second, sizeof(double)) != 0) return false;
    ++it;
  }
  return true;
}

}  // namespace seqdistill
