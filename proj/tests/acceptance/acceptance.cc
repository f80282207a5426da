// tests/acceptance/acceptance.cc

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

// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--work DIR] [N ...]
//
// With no numbers every criterion runs. Experiments for criteria 7 to 10
// live under DIR (default ./acceptance-work); criterion 7 always starts
// from empty seed directories so its wall-clock limit covers a full run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "base/random.h"
#include "fst/forward-backward.h"
#include "lfmmi/distill-loss.h"
#include "pipeline/experiment.h"
#include "pipeline/objective-check.h"
#include "stream/chunk-stream.h"
#include "train/schedule.h"

using namespace seqdistill;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string summary;             // appended to the PASS/FAIL line
  std::vector<std::string> lines;  // details printed below it
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Num(double x, int precision = 4) {
  std::ostringstream ss;
  ss << std::setprecision(precision) << x;
  return ss.str();
}

std::string Sci(double x) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(2) << x;
  return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Forward-backward against path enumeration.

// Sum over every accepting path of exactly T arcs, written independently of
// the library. Returns false past `limit` paths.
bool EnumerateLogZ(const Wfst& g, const Tensor& ll, size_t limit, double* log_z) {
  std::vector<double> scores;
  std::function<void(StateId, int, double)> walk = [&](StateId s, int t, double score) {
    if (scores.size() > limit) return;
    if (t == ll.Rows()) {
      if (g.IsFinal(s)) scores.push_back(score + g.FinalWeight(s));
      return;
    }
    for (const Arc& a : g.Arcs())
      if (a.src == s) walk(a.dst, t + 1, score + a.weight + ll(t, a.ilabel - 1));
  };
  walk(g.Start(), 0, 0.0);
  if (scores.empty() || scores.size() > limit) return false;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - mx);
  *log_z = mx + std::log(sum);
  return true;
}

Verdict ForwardBackwardOracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const int kInstances = 200;
  Rng rng(20261016);
  int done = 0, tries = 0;
  double worst_logz = 0.0, worst_row = 0.0;
  while (done < kInstances) {
    ++tries;
    const int states = rng.UniformInt(1, 6);
    const int pdfs = rng.UniformInt(1, 4);
    const int frames = rng.UniformInt(1, 8);
    Wfst g;
    for (int i = 0; i < states; ++i) g.AddState();
    const int arcs = rng.UniformInt(1, 3 * states);
    for (int i = 0; i < arcs; ++i)
      g.AddArc(rng.UniformInt(states), rng.UniformInt(states), rng.UniformInt(1, pdfs), 0,
               rng.Uniform(-2.0, 0.5));
    for (int s = 0; s < states; ++s)
      if (rng.Bernoulli(0.5)) g.SetFinal(s, rng.Uniform(-1.0, 0.5));
    g = g.Trimmed();
    if (g.NumStates() == 0) continue;
    Tensor ll = Tensor::Zeros({frames, pdfs});
    for (size_t i = 0; i < ll.Size(); ++i) ll[i] = rng.Uniform(-4.0, 1.0);
    double oracle = 0.0;
    if (!EnumerateLogZ(g, ll, 200000, &oracle)) continue;
    const ForwardBackwardResult r = ForwardBackward(g, ll);
    worst_logz = std::max(worst_logz, std::fabs(r.log_z - oracle));
    for (int t = 0; t < frames; ++t) {
      double row = 0.0;
      for (int j = 0; j < pdfs; ++j) row += r.occupancies(t, j);
      worst_row = std::max(worst_row, std::fabs(row - 1.0));
    }
    ++done;
  }
  const double secs = Seconds(t0);
  Verdict v;
  v.pass = worst_logz <= 1e-10 && worst_row <= 1e-10 && secs < 10.0;
  v.summary = std::to_string(done) + " instances, max |logZ err| " + Sci(worst_logz) +
              " (tol 1e-10), max |occupancy row sum - 1| " + Sci(worst_row) +
              " (tol 1e-10), " + Num(secs, 3) + " s (limit 10 s)";
  v.lines.push_back(std::to_string(tries - done) + " drawn graphs had no path of the drawn length");
  return v;
}

// ---------------------------------------------------------------------------
// 2. Finite-difference gradient checks.

Verdict GradientChecks() {
  const auto t0 = std::chrono::steady_clock::now();
  const ObjectiveCheckReport r = CheckObjectiveGradients(20, 1e-4, 1);
  const double secs = Seconds(t0);
  Verdict v;
  bool all_counts = r.checks.size() == 4;
  for (const ObjectiveCheck& c : r.checks) {
    all_counts = all_counts && c.instances >= 20;
    v.lines.push_back(c.name + ": " + std::to_string(c.instances) + " seeds, max rel err " +
                      Sci(c.max_rel_error));
  }
  v.lines.push_back(std::string("mmi gradient == numerator - denominator occupancies: ") +
                    (r.occupancy_identity ? "bitwise" : "VIOLATED"));
  v.pass = all_counts && r.Passed(1e-6) && secs < 60.0;
  v.summary = "max rel err " + Sci(r.MaxRelError()) + " (tol 1e-6, eps 1e-4), " + Num(secs, 3) +
              " s (limit 60 s)";
  return v;
}

// ---------------------------------------------------------------------------
// 3. Hand-computed MMI value.

Verdict HandMmi() {
  // One frame; the denominator accepts pdf 1 or pdf 2 with equal weight,
  // the numerator only pdf 1.
  Wfst den, num;
  for (Wfst* g : {&den, &num}) {
    g->AddState();
    g->AddState();
    g->AddArc(0, 1, 1, 0, 0.0);
    g->SetFinal(1, 0.0);
  }
  den.AddArc(0, 1, 2, 0, 0.0);
  const MmiResult r = MmiObjective(Tensor::Matrix({{0.0, 0.0}}), num, den);
  const double ev = std::fabs(r.value - std::log(0.5));
  const double eg = std::max(std::fabs(r.grad(0, 0) - 0.5), std::fabs(r.grad(0, 1) + 0.5));
  Verdict v;
  v.pass = ev <= 1e-12 && eg <= 1e-12;
  v.summary = "value " + Num(r.value, 17) + " (log 1/2, err " + Sci(ev) + "), gradient (" +
              Num(r.grad(0, 0), 17) + ", " + Num(r.grad(0, 1), 17) + ") (err " + Sci(eg) +
              ", tol 1e-12)";
  return v;
}

// ---------------------------------------------------------------------------
// 4. Streaming inference against the chunk-masked forward.

Verdict StreamingEquivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const int kTriples = 24;
  const std::vector<std::string> names = {"S1", "S2", "S3", "S4", "S5"};
  Rng rng(4);
  double worst = 0.0;
  for (int i = 0; i < kTriples; ++i) {
    const std::string name = names[rng.UniformInt(static_cast<int>(names.size()))];
    AcousticModel model(DeskModelConfig(name, rng.UniformInt(3, 20)), rng.NextU64());
    const int n = rng.UniformInt(160 * 6, 160 * 60);
    std::vector<float> samples(n);
    for (float& x : samples) x = static_cast<float>(0.3 * rng.Gaussian());
    const int hist = rng.Bernoulli(0.2) ? kInfiniteFrames : rng.UniformInt(0, 12);
    const ChunkSpec spec{hist, rng.UniformInt(1, 16)};
    const int frames = n / 160;
    auto mask = std::make_shared<const AttentionMask>(BuildChunkMask(frames, spec));
    const Tensor ref = RunModel(model, WaveformTensor(samples), mask).output;
    VectorSource source(samples);
    const Tensor streamed = StreamInfer(model, &source, spec);
    if (!streamed.SameShape(ref)) {
      worst = INFINITY;
      continue;
    }
    double diff = 0.0, scale = 0.0;
    for (size_t k = 0; k < ref.Size(); ++k) {
      diff = std::max(diff, std::fabs(streamed[k] - ref[k]));
      scale = std::max(scale, std::fabs(ref[k]));
    }
    worst = std::max(worst, diff / std::max(scale, 1e-300));
  }

  // A (inf, inf) mask leaves the forward untouched.
  bool bitwise = true;
  for (const std::string name : {"T", "S1", "S5"}) {
    AcousticModel model(DeskModelConfig(name, 10), rng.NextU64());
    const int n = rng.UniformInt(160 * 6, 160 * 60);
    std::vector<float> samples(n);
    for (float& x : samples) x = static_cast<float>(0.3 * rng.Gaussian());
    const Tensor wav = WaveformTensor(samples);
    auto mask =
        std::make_shared<const AttentionMask>(BuildChunkMask(n / 160, ChunkSpec::Full()));
    bitwise = bitwise && RunModel(model, wav, mask).output.BitwiseEqual(RunModel(model, wav).output);
  }
  const double secs = Seconds(t0);
  Verdict v;
  v.pass = worst <= 1e-5 && bitwise && secs < 30.0;
  v.summary = std::to_string(kTriples) + " random (model, input, spec) triples, max rel err " +
              Sci(worst) + " (tol 1e-5); (inf,inf) mask " +
              (bitwise ? "bitwise equal" : "DIFFERS") + "; " + Num(secs, 3) + " s (limit 30 s)";
  return v;
}

// ---------------------------------------------------------------------------
// 5 and 6. Latency and schedule arithmetic.

Verdict Latency() {
  const double ms = AvgLookaheadMs(ChunkSpec{600, 48, 20.0});
  Verdict v;
  v.pass = ms == 480.0;
  v.summary = "avg look-ahead (600,48) at 20 ms = " + Num(ms, 17) + " ms (expected 480 exactly)";
  return v;
}

Verdict LrBoundaries() {
  const double peak = 5e-4;
  double worst = 0.0;
  for (int total : {10, 1000, 250000}) {
    const TriStateSchedule s{peak, total};
    const std::vector<std::pair<int, double>> expect = {
        {total / 10, peak}, {total / 2, peak}, {total, 0.05 * peak}};
    for (const auto& [step, lr] : expect)
      worst = std::max(worst, std::fabs(LrAt(step, s) - lr) / lr);
  }
  Verdict v;
  v.pass = worst <= 1e-15;
  v.summary = "10%, 50% and final steps for 10, 1000 and 250000 total steps, max rel err " +
              Sci(worst) + " (tol 1e-15)";
  return v;
}

// ---------------------------------------------------------------------------
// 7 to 10. Desk-scale experiments.

class Workspace {
 public:
  explicit Workspace(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
    log_.open(root_ / "experiment.log", std::ios::app);
  }

  fs::path SeedDir(int seed) const { return root_ / ("seed" + std::to_string(seed)); }

  Experiment Open(int seed) {
    ExperimentConfig c;
    c.Set("seed", std::to_string(seed));
    c.Set("out", SeedDir(seed).string());
    return Experiment(c, &log_);
  }

  // Runs the stages `stage` depends on that are missing or stale.
  void Prepare(Experiment& x, const std::string& stage) {
    for (const std::string& in : StageInputs(stage)) {
      Prepare(x, in);
      if (!x.IsFresh(in)) x.Run(in);
    }
  }

 private:
  fs::path root_;
  std::ofstream log_;
};

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Verdict TwoStepVsSingleStep(Workspace& ws) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<double> two, one;
  int wins = 0;
  Verdict v;
  v.lines.push_back("seed  teacher(full)  SN(full)  two-step SS  single-step SS");
  for (int seed = 1; seed <= 5; ++seed) {
    fs::remove_all(ws.SeedDir(seed));
    Experiment x = ws.Open(seed);
    x.GenData();
    x.BuildDen();
    const RunReport teacher = x.TrainTeacher();
    x.PseudoLabel();
    const RunReport sn = x.Distill1();
    const RunReport ss = x.Distill2();
    const RunReport single = x.SingleStep();
    two.push_back(std::stod(ss.Summary("wer_streaming")));
    one.push_back(std::stod(single.Summary("wer_streaming")));
    wins += two.back() < one.back();
    v.lines.push_back(std::to_string(seed) + "     " + Num(std::stod(teacher.Summary("wer_full"))) +
                      "         " + Num(std::stod(sn.Summary("wer_full"))) + "     " +
                      Num(two.back()) + "       " + Num(one.back()));
  }
  const double minutes = Seconds(t0) / 60.0;
  v.pass = Mean(two) < Mean(one) && wins >= 4 && minutes < 45.0;
  v.summary = "mean streaming WER two-step " + Num(Mean(two)) + " vs single-step " +
              Num(Mean(one)) + ", two-step wins " + std::to_string(wins) + "/5 (need 4), " +
              Num(minutes, 3) + " min (limit 45 min)";
  return v;
}

Verdict Ablation(Workspace& ws) {
  std::map<std::string, std::vector<double>> wer;
  std::map<std::string, std::pair<double, double>> weights;
  for (int seed = 1; seed <= 5; ++seed) {
    Experiment x = ws.Open(seed);
    ws.Prepare(x, "ablate");
    for (const AblationRow& r : x.Ablate()) {
      wer[r.name].push_back(r.wer);
      weights[r.name] = {r.alpha, r.beta};
    }
  }
  Verdict v;
  v.lines.push_back("model  alpha  beta  mean WER  per seed");
  for (const auto& [name, w] : wer) {
    std::string row = name + "     " + Num(weights[name].first) + "    " +
                      Num(weights[name].second) + "   " + Num(Mean(w)) + "    ";
    for (double x : w) row += " " + Num(x);
    v.lines.push_back(row);
  }
  const double m1 = Mean(wer.at("M1")), m3 = Mean(wer.at("M3"));
  v.pass = m3 < m1;
  v.summary = "mean non-streaming student WER M3 (hidden + LF-MMI) " + Num(m3) +
              " vs M1 (MSE prediction only) " + Num(m1);
  return v;
}

Verdict RtfLadder(Workspace& ws) {
  Experiment x = ws.Open(1);
  ws.Prepare(x, "bench-rtf");
  const std::vector<RtfRow> rows = x.BenchRtf();
  Verdict v;
  bool decreasing = true;
  for (size_t i = 0; i < rows.size(); ++i) {
    v.lines.push_back(rows[i].model + "  params " + std::to_string(rows[i].params) + "  RTF " +
                      Sci(rows[i].rtf));
    if (i > 0) decreasing = decreasing && rows[i].rtf < rows[i - 1].rtf;
  }
  const double ratio = rows.front().rtf / rows.back().rtf;
  v.pass = rows.size() == 6 && decreasing && ratio >= 3.0;
  v.summary = std::string("RTF ") + (decreasing ? "strictly decreasing" : "NOT strictly decreasing") +
              " over " + rows.front().model + ".." + rows.back().model + ", " + rows.front().model +
              "/" + rows.back().model + " = " + Num(ratio, 3) + " (need >= 3)";
  return v;
}

std::string ReadBytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict Determinism(Workspace& ws) {
  Experiment x = ws.Open(1);
  ws.Prepare(x, "distill1");
  if (!x.IsFresh("distill1")) x.Distill1();
  const fs::path dir = x.StageDir("distill1");
  const std::vector<std::string> files = {"model.bin",      "projections.txt", "report.csv",
                                          "report.summary", "distill.cfg",     "config.txt",
                                          "stamp"};
  std::vector<std::string> before;
  for (const std::string& f : files) before.push_back(ReadBytes(dir / f));
  x.Distill1();
  Verdict v;
  v.pass = true;
  for (size_t i = 0; i < files.size(); ++i) {
    const bool same = ReadBytes(dir / files[i]) == before[i];
    v.pass = v.pass && same;
    v.lines.push_back(files[i] + ": " + std::to_string(before[i].size()) + " bytes, " +
                      (same ? "identical" : "DIFFERENT"));
  }
  v.summary = std::string("two distill1 runs (seed 1) ") +
              (v.pass ? "byte-identical" : "differ") + " in checkpoint, projections and reports";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = "acceptance-work";
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit)) {
      selected.insert(std::stoi(a));
    } else {
      std::cerr << "usage: acceptance [--work DIR] [criterion ...]\n";
      return 2;
    }
  }
  Workspace ws(work);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"forward-backward vs path enumeration", ForwardBackwardOracle},
      {"objective gradients vs finite differences", GradientChecks},
      {"hand-computed MMI case", HandMmi},
      {"streaming inference vs chunk-masked forward", StreamingEquivalence},
      {"average look-ahead arithmetic", Latency},
      {"learning-rate schedule boundaries", LrBoundaries},
      {"two-step vs single-step distillation", [&] { return TwoStepVsSingleStep(ws); }},
      {"objective ablation M1..M4", [&] { return Ablation(ws); }},
      {"real-time factor ladder", [&] { return RtfLadder(ws); }},
      {"distill1 determinism", [&] { return Determinism(ws); }},
  };
  int failed = 0, ran = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    ++ran;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("error: ") + e.what();
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": "
              << v.summary << '\n';
    for (const std::string& line : v.lines) std::cout << "       " << line << '\n';
    std::cout.flush();
  }
  std::cout << ran - failed << '/' << ran << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
