// src/pipeline/experiment.cc

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

#include "pipeline/experiment.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "base/error.h"
#include "data/audio-io.h"

namespace seqdistill {

namespace fs = std::filesystem;

namespace {

std::string Fnv1aHex(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ReadText(const std::string& path) {
  std::ifstream is(path);
  if (!is) return "";
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path);
  os << text;
}

// "key=value" lines of a report summary.
std::map<std::string, std::string> ParseSummary(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const size_t eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

const std::map<std::string, std::vector<std::string>>& InputTable() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"gen-data", {}},
      {"build-den", {"gen-data"}},
      {"train-teacher", {"gen-data", "build-den"}},
      {"pseudo-label", {"gen-data", "build-den", "train-teacher"}},
      {"distill1", {"gen-data", "build-den", "train-teacher", "pseudo-label"}},
      {"distill2", {"gen-data", "build-den", "train-teacher", "pseudo-label", "distill1"}},
      {"single-step", {"gen-data", "build-den", "train-teacher", "pseudo-label"}},
      {"ablate", {"gen-data", "build-den", "train-teacher", "pseudo-label"}},
      {"eval", {"gen-data", "build-den", "train-teacher"}},
      {"bench-rtf", {"gen-data"}},
      {"gradcheck", {}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& StageNames() {
  static const std::vector<std::string> names = {
      "gen-data", "build-den",   "train-teacher", "pseudo-label", "distill1",  "distill2",
      "single-step", "ablate", "eval",          "bench-rtf",    "gradcheck"};
  return names;
}

const std::vector<std::string>& StageInputs(const std::string& stage) {
  auto it = InputTable().find(stage);
  if (it == InputTable().end()) SEQDISTILL_THROW(ConfigError, "unknown command '" << stage << "'");
  return it->second;
}

void SaveTensors(const std::vector<Tensor>& tensors, const std::string& path) {
  std::ostringstream os;
  os << tensors.size() << '\n';
  for (const Tensor& t : tensors) {
    os << t.Rows() << ' ' << t.Cols() << '\n';
    for (size_t i = 0; i < t.Size(); ++i)
      os << FormatDouble(t[i]) << ((i + 1) % t.Cols() ? ' ' : '\n');
  }
  WriteText(path, os.str());
}

std::vector<Tensor> LoadTensors(const std::string& path) {
  std::ifstream is(path);
  if (!is) SEQDISTILL_THROW(std::runtime_error, "cannot read " << path);
  size_t count = 0;
  is >> count;
  std::vector<Tensor> out;
  for (size_t k = 0; k < count; ++k) {
    int rows = 0, cols = 0;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0)
      SEQDISTILL_THROW(std::runtime_error, path << ": malformed tensor header");
    Tensor t({rows, cols});
    std::string word;
    for (size_t i = 0; i < t.Size(); ++i) {
      if (!(is >> word)) SEQDISTILL_THROW(std::runtime_error, path << ": truncated tensor");
      t[i] = ParseDouble(word);
    }
    out.push_back(std::move(t));
  }
  return out;
}

Experiment::Experiment(ExperimentConfig config, std::ostream* log)
    : config_(std::move(config)), log_(log) {
  config_.Validate();
}

std::string Experiment::StageDir(const std::string& stage) const {
  return (fs::path(config_.OutDir()) / stage).string();
}

std::string Experiment::ExpectedStamp(const std::string& stage) const {
  std::ostringstream os;
  os << "stage=" << stage << '\n';
  std::istringstream keys(config_.TextForCommand(stage));
  std::string line;
  while (std::getline(keys, line))
    if (line.rfind("out=", 0) != 0) os << line << '\n';
  for (const std::string& input : StageInputs(stage))
    os << "input." << input << '=' << ExpectedStamp(input) << '\n';
  return Fnv1aHex(os.str());
}

bool Experiment::IsFresh(const std::string& stage) const {
  return ReadText(StageDir(stage) + "/stamp") == ExpectedStamp(stage) + "\n";
}

void Experiment::RequireInputs(const std::string& stage) const {
  for (const std::string& input : StageInputs(stage)) {
    if (IsFresh(input)) continue;
    if (!fs::exists(StageDir(input) + "/stamp"))
      throw MissingDependencyError(input, "'" + stage + "' needs the output of '" + input +
                                              "'; run `seqdistill " + input + "` first");
    throw MissingDependencyError(input, "output of '" + input +
                                            "' was produced with a different configuration; "
                                            "rerun `seqdistill " + input + "`");
  }
}

void Experiment::BeginStage(const std::string& stage) const {
  RequireInputs(stage);
  const std::string dir = StageDir(stage);
  fs::create_directories(dir);
  fs::remove(dir + "/stamp");
  WriteText(dir + "/config.txt", config_.TextForCommand(stage));
  if (log_) *log_ << "[" << stage << "] writing " << dir << '\n';
}

void Experiment::FinishStage(const std::string& stage) const {
  WriteText(StageDir(stage) + "/stamp", ExpectedStamp(stage) + "\n");
}

void Experiment::GenData() {
  BeginStage("gen-data");
  ToyTask task = GenToyTask(config_.TaskOptions());
  SaveToyTask(task, StageDir("gen-data"));
  FinishStage("gen-data");
}

void Experiment::BuildDen() {
  BeginStage("build-den");
  ToyTask task = LoadToyTask(StageDir("gen-data"));
  HmmTopology topo(task.lexicon.NumPhones());
  BuildDenominatorGraph(task.text_corpus, task.lexicon, topo, config_.DenOptions())
      .WriteFile(StageDir("build-den") + "/den.fst");
  BuildDecodingGraph(task.text_corpus, task.lexicon, topo, config_.DecodeOptions())
      .WriteFile(StageDir("build-den") + "/decode.fst");
  FinishStage("build-den");
}

namespace {

struct Inputs {
  ToyTask task;
  Wfst den;
  Wfst decode;
};

Inputs LoadInputs(const Experiment& e) {
  Inputs in{LoadToyTask(e.StageDir("gen-data")), Wfst::ReadFile(e.StageDir("build-den") + "/den.fst"),
            Wfst::ReadFile(e.StageDir("build-den") + "/decode.fst")};
  return in;
}

std::function<void(int, const AcousticModel&)> EpochCheckpoints(const ExperimentConfig& c,
                                                                 const std::string& dir) {
  if (!c.GetBool("train.checkpoint_every_epoch")) return nullptr;
  return [dir](int epoch, const AcousticModel& m) {
    char name[32];
    std::snprintf(name, sizeof(name), "/epoch-%03d.bin", epoch);
    m.Save(dir + name);
  };
}

}  // namespace

RunReport Experiment::TrainTeacher() {
  BeginStage("train-teacher");
  const std::string dir = StageDir("train-teacher");
  Inputs in = LoadInputs(*this);
  TrainOptions opts = config_.TeacherTrainOptions();
  opts.log = log_;
  opts.on_epoch = EpochCheckpoints(config_, dir);
  TeacherResult r = seqdistill::TrainTeacher(in.task.labeled, in.task.lexicon,
                                             config_.TeacherModel(in.task.lexicon.NumPhones()),
                                             in.den, opts);
  r.model.Save(dir + "/model.bin");
  WerAccumulator train;
  EvaluateWer(r.model, in.task.labeled, in.decode, ChunkSpec::Full(), &train);
  r.report.AddSummary("train_exact_fraction",
                      static_cast<double>(train.ExactSentences()) / train.Sentences());
  r.report.AddSummary("train_wer", train.Wer());
  r.report.AddSummary("wer_full", EvaluateWer(r.model, in.task.test, in.decode, ChunkSpec::Full()));
  r.report.Write(dir + "/report");
  FinishStage("train-teacher");
  return r.report;
}

int Experiment::PseudoLabel() {
  BeginStage("pseudo-label");
  const std::string dir = StageDir("pseudo-label");
  Inputs in = LoadInputs(*this);
  AcousticModel teacher = AcousticModel::Load(StageDir("train-teacher") + "/model.bin");
  PseudoSupervision sup =
      MakePseudoSupervision(teacher, in.task.unlabeled, in.den, config_.PseudoOptions(), log_);
  fs::remove_all(dir + "/numerators");
  SavePseudoSupervision(sup, dir + "/numerators");
  FinishStage("pseudo-label");
  return sup.skipped;
}

RunReport Experiment::RunDistill(const std::string& stage, const ExperimentConfig& cfg,
                                 const std::string& dir) {
  Inputs in = LoadInputs(*this);
  const int pdfs = in.task.lexicon.NumPhones();
  AcousticModel teacher = AcousticModel::Load(StageDir("train-teacher") + "/model.bin");
  PseudoSupervision sup = LoadPseudoSupervision(StageDir("pseudo-label") + "/numerators");
  const ModelConfig sc = cfg.StudentModel(pdfs);
  const uint64_t seed = cfg.Seed();

  DistillConfig d;
  d.weights = cfg.Weights();
  d.mse_on_log_softmax = cfg.GetBool("distill.mse_log_softmax");
  d.stop_history_gradient = cfg.GetBool("distill.stop_history_grad");
  d.relabel = cfg.PseudoOptions();
  std::string init_desc, teacher_desc = "T";
  std::vector<Tensor> projections;
  const std::vector<Tensor>* init_projections = nullptr;
  auto make_init = [&]() -> AcousticModel {
    if (stage == "distill1") {
      d.train = cfg.DistillTrainOptions("distill1");
      d.chunk = ChunkSpec::Full();
      init_desc = "shared-from-teacher";
      return ShareTeacherParams(teacher, sc, DeriveSeed(seed, 23));
    }
    d.train = cfg.DistillTrainOptions("distill2");
    d.chunk = cfg.StreamingSpec();
    if (stage != "distill2") {
      init_desc = "random";
      return AcousticModel(sc, DeriveSeed(seed, 25));
    }
    init_desc = "from-distill1";
    AcousticModel sn = AcousticModel::Load(StageDir("distill1") + "/model.bin");
    if (cfg.Get("distill2.teacher") == "SN") {
      teacher = sn;
      teacher_desc = "SN";
    } else {
      projections = LoadTensors(StageDir("distill1") + "/projections.txt");
      init_projections = &projections;
    }
    return InitStreamingFrom(sn);
  };
  const AcousticModel init = make_init();
  d.layer_map = teacher_desc == "SN" ? AutoLayerMap(sc.blocks, sc.blocks)
                                     : cfg.StudentLayerMap(sc.blocks, teacher.Config().blocks);
  if (d.weights.alpha == 1.0) init_projections = nullptr;
  d.train.log = log_;
  d.train.on_epoch = EpochCheckpoints(cfg, dir);

  std::ostringstream desc;
  desc << "init=" << init_desc << "\nteacher=" << teacher_desc
       << "\nstudent=" << cfg.Get("student.model") << "\ndata=unlabeled:"
       << in.task.unlabeled.size() << "\nepochs=" << d.train.epochs
       << "\npeak_lr=" << FormatDouble(d.train.peak_lr) << "\ntrain_seed=" << d.train.seed
       << "\naccumulate=" << d.train.accumulate << "\naugment=" << d.train.augment
       << "\nchunk=" << d.chunk.ToString() << "\nstop_history_grad=" << d.stop_history_gradient
       << "\nalpha=" << FormatDouble(d.weights.alpha) << "\nbeta=" << FormatDouble(d.weights.beta)
       << "\nlayer_map=" << LayerMapToString(d.layer_map) << '\n';
  WriteText(dir + "/distill.cfg", desc.str());

  DistillResult r = DistillStep(teacher, init, sup, in.task.unlabeled, in.den, d, init_projections);
  r.student.Save(dir + "/model.bin");
  SaveTensors(r.projections, dir + "/projections.txt");
  if (stage == "distill1")
    r.report.AddSummary("wer_full",
                        EvaluateWer(r.student, in.task.test, in.decode, ChunkSpec::Full()));
  r.report.AddSummary("wer_streaming",
                      EvaluateWer(r.student, in.task.test, in.decode, cfg.StreamingSpec()));
  r.report.Write(dir + "/report");
  return r.report;
}

RunReport Experiment::Distill1() {
  BeginStage("distill1");
  RunReport r = RunDistill("distill1", config_, StageDir("distill1"));
  FinishStage("distill1");
  return r;
}

RunReport Experiment::Distill2() {
  BeginStage("distill2");
  RunReport r = RunDistill("distill2", config_, StageDir("distill2"));
  FinishStage("distill2");
  return r;
}

RunReport Experiment::SingleStep() {
  BeginStage("single-step");
  RunReport r = RunDistill("single-step", config_, StageDir("single-step"));
  FinishStage("single-step");
  return r;
}

std::vector<AblationRow> Experiment::Ablate() {
  BeginStage("ablate");
  const std::string dir = StageDir("ablate");
  std::vector<AblationRow> rows = {
      {"M1", 1.0, 0.0}, {"M2", 1.0, 1.0}, {"M3", 0.8, 1.0}, {"M4", 0.8, 0.8}};
  std::ostringstream table;
  table << "model,alpha,beta,wer\n";
  for (AblationRow& row : rows) {
    ExperimentConfig cfg = config_;
    cfg.Set("alpha", FormatDouble(row.alpha));
    cfg.Set("beta", FormatDouble(row.beta));
    const std::string sub = dir + "/" + row.name;
    fs::create_directories(sub);
    // A fresh distill1 run with these weights is the same computation;
    // its outputs are copied instead of recomputed.
    if (Experiment(cfg).ExpectedStamp("distill1") ==
        ReadText(StageDir("distill1") + "/stamp").substr(0, 16)) {
      if (log_) *log_ << "[ablate] " << row.name << " reuses distill1\n";
      for (const char* f : {"model.bin", "projections.txt", "distill.cfg", "report.csv",
                            "report.summary", "report.time"})
        fs::copy_file(StageDir("distill1") + "/" + f, sub + "/" + f,
                      fs::copy_options::overwrite_existing);
      row.wer = ParseDouble(ParseSummary(ReadText(sub + "/report.summary")).at("wer_full"));
    } else {
      if (log_) *log_ << "[ablate] training " << row.name << '\n';
      row.wer = ParseDouble(RunDistill("distill1", cfg, sub).Summary("wer_full"));
    }
    table << row.name << ',' << FormatDouble(row.alpha) << ',' << FormatDouble(row.beta) << ','
          << FormatDouble(row.wer) << '\n';
  }
  WriteText(dir + "/table.csv", table.str());
  FinishStage("ablate");
  return rows;
}

std::vector<WerRow> Experiment::Eval() {
  BeginStage("eval");
  Inputs in = LoadInputs(*this);
  const ChunkSpec stream = config_.StreamingSpec();
  std::vector<WerRow> rows;
  auto add = [&](const std::string& name, const std::string& path, const ChunkSpec& spec) {
    AcousticModel m = AcousticModel::Load(path);
    rows.push_back({name, spec.ToString(), EvaluateWer(m, in.task.test, in.decode, spec)});
  };
  add("teacher", StageDir("train-teacher") + "/model.bin", ChunkSpec::Full());
  add("teacher", StageDir("train-teacher") + "/model.bin", stream);
  if (IsFresh("distill1")) {
    add("distill1", StageDir("distill1") + "/model.bin", ChunkSpec::Full());
    add("distill1", StageDir("distill1") + "/model.bin", stream);
  }
  for (const char* stage : {"distill2", "single-step"})
    if (IsFresh(stage)) add(stage, StageDir(stage) + "/model.bin", stream);
  std::ostringstream csv;
  csv << "model,spec,wer\n";
  for (const WerRow& r : rows) csv << r.model << ',' << r.spec << ',' << FormatDouble(r.wer) << '\n';
  WriteText(StageDir("eval") + "/wer.csv", csv.str());
  FinishStage("eval");
  return rows;
}

std::vector<RtfRow> Experiment::BenchRtf() {
  BeginStage("bench-rtf");
  ToyTask task = LoadToyTask(StageDir("gen-data"));
  const int pdfs = task.lexicon.NumPhones();
  const bool streaming = config_.GetBool("rtf.streaming");
  const ChunkSpec spec = streaming ? config_.StreamingSpec() : ChunkSpec::Full();
  std::vector<AcousticModel> models;
  std::vector<RtfRow> rows;
  std::stringstream names(config_.Get("rtf.models"));
  std::string name;
  while (std::getline(names, name, ',')) {
    ModelConfig c = config_.ModelByName(name, pdfs);
    if (streaming && !c.causal_cnn)
      SEQDISTILL_THROW(ConfigError, "model " << name << " has a non-causal encoder and cannot "
                                                        "be timed with rtf.streaming=1");
    models.emplace_back(c, DeriveSeed(config_.Seed(), 26));
    rows.push_back({name, ParamCount(c), 0.0});
  }
  std::vector<const AcousticModel*> ptrs;
  for (const AcousticModel& m : models) ptrs.push_back(&m);
  std::vector<double> rtf =
      seqdistill::BenchRtf(ptrs, task.test, spec, task.sample_rate, config_.GetInt("rtf.runs"));
  std::ostringstream csv;
  csv << "model,params,rtf\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    rows[i].rtf = rtf[i];
    csv << rows[i].model << ',' << rows[i].params << ',' << FormatDouble(rtf[i]) << '\n';
  }
  WriteText(StageDir("bench-rtf") + "/rtf.csv", csv.str());
  FinishStage("bench-rtf");
  return rows;
}

ObjectiveCheckReport Experiment::GradCheck() {
  BeginStage("gradcheck");
  ObjectiveCheckReport r = CheckObjectiveGradients(config_.GetInt("gradcheck.seeds"),
                                                   config_.GetDouble("gradcheck.epsilon"),
                                                   config_.Seed());
  std::ostringstream csv;
  csv << "objective,instances,max_rel_error\n";
  for (const ObjectiveCheck& c : r.checks)
    csv << c.name << ',' << c.instances << ',' << FormatDouble(c.max_rel_error) << '\n';
  csv << "occupancy_identity," << r.checks.front().instances << ','
      << (r.occupancy_identity ? "0" : "1") << '\n';
  WriteText(StageDir("gradcheck") + "/result.csv", csv.str());
  FinishStage("gradcheck");
  return r;
}

void Experiment::Run(const std::string& stage) {
  if (stage == "gen-data") return GenData();
  if (stage == "build-den") return BuildDen();
  if (stage == "train-teacher") return void(TrainTeacher());
  if (stage == "pseudo-label") return void(PseudoLabel());
  if (stage == "distill1") return void(Distill1());
  if (stage == "distill2") return void(Distill2());
  if (stage == "single-step") return void(SingleStep());
  if (stage == "ablate") return void(Ablate());
  if (stage == "eval") return void(Eval());
  if (stage == "bench-rtf") return void(BenchRtf());
  if (stage == "gradcheck") return void(GradCheck());
  SEQDISTILL_THROW(ConfigError, "unknown command '" << stage << "'");
}

}  // namespace seqdistill
