// src/pipeline/experiment-config.cc

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

#include "pipeline/experiment-config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "base/error.h"

namespace seqdistill {

namespace {

const std::vector<std::string> kTraining = {"train-teacher", "distill1", "distill2",
                                            "single-step", "ablate"};
const std::vector<std::string> kDistill = {"distill1", "distill2", "single-step", "ablate"};

std::vector<ConfigKey> BuildKeys() {
  auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  return {
      {"seed", "1", "base seed; every stage derives its own streams from it", {}},
      {"out", "exp", "output root; stage outputs go to <out>/<stage>/", {}},
      {"task.num_words", "20", "toy vocabulary size", {"gen-data"}},
      {"task.num_phones", "10", "phones including silence", {"gen-data"}},
      {"task.labeled_n", "50", "transcribed utterances", {"gen-data"}},
      {"task.unlabeled_n", "200", "untranscribed utterances", {"gen-data"}},
      {"task.test_n", "100", "test utterances", {"gen-data"}},
      {"task.corpus_n", "500", "text corpus sentences", {"gen-data"}},
      {"task.sample_rate", "8000", "audio sample rate in Hz", {"gen-data"}},
      {"task.p_sil", "0.2", "probability of silence between words in the audio", {"gen-data"}},
      {"task.snr_db", "20", "tone-to-noise ratio in dB", {"gen-data"}},
      {"den.order", "2", "phone n-gram order of the denominator graph (1-4)", {"build-den"}},
      {"den.samples_per_sentence", "1", "phone realizations sampled per corpus sentence",
       {"build-den"}},
      {"den.backoff_mass", "0.1", "probability mass for unseen phone successors",
       {"build-den"}},
      {"den.p_sil", "0.2", "silence probability when sampling phone strings", {"build-den"}},
      {"decode.backoff_mass", "0.1", "probability mass for unseen word successors",
       {"build-den"}},
      {"decode.p_sil", "0.2", "silence probability between words in the decoding graph",
       {"build-den"}},
      {"teacher.model", "T", "teacher architecture (T, S1..S5)",
       with({"train-teacher", "bench-rtf"}, kDistill)},
      {"teacher.epochs", "60", "teacher passes over the labeled set", {"train-teacher"}},
      {"teacher.lr", "0.002", "teacher peak learning rate", {"train-teacher"}},
      {"train.accumulate", "8", "utterances per optimizer step", kTraining},
      {"train.augment", "1", "volume and pitch augmentation (0 or 1)", kTraining},
      {"aug.p", "0.5", "probability that an utterance is augmented", kTraining},
      {"aug.vol_lo", "0.3", "lowest volume factor", kTraining},
      {"aug.vol_hi", "3", "highest volume factor", kTraining},
      {"aug.pitch_lo", "0.9", "lowest pitch factor", kTraining},
      {"aug.pitch_hi", "1.1", "highest pitch factor", kTraining},
      {"train.mmi_per_frame", "1", "divide each utterance's MMI term by its frames",
       kTraining},
      {"train.checkpoint_every_epoch", "0", "also write epoch-NNN.bin after every epoch",
       kTraining},
      {"pseudo.nbest", "4", "paths per pseudo-label lattice", with({"pseudo-label"}, kDistill)},
      {"pseudo.beam", "10", "pseudo-label pruning beam", with({"pseudo-label"}, kDistill)},
      {"student.model", "S1", "student architecture (T, S1..S5)", kDistill},
      {"layer_map", "auto", "student:teacher block pairs such as 1:2,2:6,3:8, or auto",
       kDistill},
      {"alpha", "0.8", "weight of the prediction loss against the hidden loss",
       {"distill1", "distill2", "single-step"}},
      {"beta", "0.8", "weight of LF-MMI against output MSE in the prediction loss",
       {"distill1", "distill2", "single-step"}},
      {"distill.mse_log_softmax", "0", "compare log-softmax outputs in the MSE term",
       kDistill},
      {"distill.stop_history_grad", "1", "no gradient through attention history chunks",
       {"distill2", "single-step"}},
      {"distill1.epochs", "30", "first-step passes over the unlabeled set",
       {"distill1", "ablate"}},
      {"distill1.lr", "0.0005", "first-step peak learning rate", {"distill1", "ablate"}},
      {"distill2.epochs", "15", "second-step (and single-step) passes",
       {"distill2", "single-step"}},
      {"distill2.lr", "0.0001", "second-step (and single-step) peak learning rate",
       {"distill2", "single-step"}},
      {"distill2.teacher", "T", "teacher of the second step: T or SN", {"distill2"}},
      {"hist", "50", "attention history in frames, or inf",
       {"distill2", "single-step", "eval"}},
      {"chunk", "4", "chunk size in frames", {"distill2", "single-step", "eval"}},
      {"rtf.models", "T,S1,S2,S3,S4,S5", "architectures to time", {"bench-rtf"}},
      {"rtf.runs", "3", "timed passes; the median is reported", {"bench-rtf"}},
      {"rtf.streaming", "0", "time chunked streaming inference instead of full context",
       {"bench-rtf"}},
      {"gradcheck.seeds", "20", "random instances per objective", {"gradcheck"}},
      {"gradcheck.epsilon", "0.0001", "central-difference step", {"gradcheck"}},
      {"gradcheck.tolerance", "1e-6", "largest allowed relative error", {"gradcheck"}},
  };
}

bool ParseBool(const std::string& v, bool* out) {
  if (v == "1" || v == "true") return *out = true, true;
  if (v == "0" || v == "false") return *out = false, true;
  return false;
}

std::vector<std::string> SplitCommas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

const std::set<std::string>& ModelNames() {
  static const std::set<std::string> names = {"T", "S1", "S2", "S3", "S4", "S5"};
  return names;
}

}  // namespace

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = BuildKeys();
  return keys;
}

std::vector<ConfigKey> KeysForCommand(const std::string& command) {
  std::vector<ConfigKey> out;
  for (const ConfigKey& k : ConfigKeys())
    if (k.commands.empty() ||
        std::find(k.commands.begin(), k.commands.end(), command) != k.commands.end())
      out.push_back(k);
  return out;
}

ExperimentConfig::ExperimentConfig() {
  for (const ConfigKey& k : ConfigKeys()) values_[k.name] = k.default_value;
}

void ExperimentConfig::Set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) SEQDISTILL_THROW(ConfigError, "unknown config key '" << key << "'");
  it->second = value;
}

void ExperimentConfig::Merge(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      SEQDISTILL_THROW(ConfigError, origin << ":" << number << ": expected key=value");
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    try {
      Set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      SEQDISTILL_THROW(ConfigError, origin << ":" << number << ": " << e.what());
    }
  }
}

ExperimentConfig ExperimentConfig::FromFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) SEQDISTILL_THROW(ConfigError, "cannot read config file " << path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  ExperimentConfig c;
  c.Merge(buffer.str(), path);
  return c;
}

const std::string& ExperimentConfig::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) SEQDISTILL_THROW(ConfigError, "unknown config key '" << key << "'");
  return it->second;
}

int ExperimentConfig::GetInt(const std::string& key) const {
  const std::string& v = Get(key);
  try {
    size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  SEQDISTILL_THROW(ConfigError, key << " must be an integer, got '" << v << "'");
}

uint64_t ExperimentConfig::GetU64(const std::string& key) const {
  const std::string& v = Get(key);
  try {
    size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const uint64_t x = std::stoull(v, &used);
      if (used == v.size()) return x;
    }
  } catch (const std::exception&) {
  }
  SEQDISTILL_THROW(ConfigError, key << " must be a non-negative integer, got '" << v << "'");
}

double ExperimentConfig::GetDouble(const std::string& key) const {
  const std::string& v = Get(key);
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  SEQDISTILL_THROW(ConfigError, key << " must be a finite number, got '" << v << "'");
}

bool ExperimentConfig::GetBool(const std::string& key) const {
  bool b = false;
  if (!ParseBool(Get(key), &b))
    SEQDISTILL_THROW(ConfigError, key << " must be 0 or 1, got '" << Get(key) << "'");
  return b;
}

std::string ExperimentConfig::ToText() const {
  std::ostringstream os;
  for (const ConfigKey& k : ConfigKeys()) os << k.name << '=' << values_.at(k.name) << '\n';
  return os.str();
}

std::string ExperimentConfig::TextForCommand(const std::string& command) const {
  std::ostringstream os;
  for (const ConfigKey& k : KeysForCommand(command))
    os << k.name << '=' << values_.at(k.name) << '\n';
  return os.str();
}

void ExperimentConfig::Validate() const {
  // Typed getters throw on malformed values; library validators cover ranges.
  auto wrap = [](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  };
  wrap([&] {
    Seed();
    if (OutDir().empty()) throw ConfigError("out must not be empty");
    TaskOptions().Validate();
    DenominatorOptions d = DenOptions();
    if (d.ngram_order < 1 || d.ngram_order > kMaxNgramOrder)
      SEQDISTILL_THROW(ConfigError, "den.order must be in [1, " << kMaxNgramOrder << "]");
    if (d.num_samples_per_sentence < 1) throw ConfigError("den.samples_per_sentence must be >= 1");
    DecodeOptions();
    for (const char* key : {"teacher.model", "student.model"})
      if (!ModelNames().count(Get(key)))
        SEQDISTILL_THROW(ConfigError, key << " must be one of T, S1..S5, got '" << Get(key) << "'");
    for (const std::string& name : SplitCommas(Get("rtf.models")))
      if (!ModelNames().count(name))
        SEQDISTILL_THROW(ConfigError, "rtf.models: unknown model '" << name << "'");
    TeacherTrainOptions().Validate();
    DistillTrainOptions("distill1").Validate();
    DistillTrainOptions("distill2").Validate();
    Weights().Validate();
    PseudoLabelOptions p = PseudoOptions();
    if (p.nbest < 1) throw ConfigError("pseudo.nbest must be >= 1");
    if (!(p.beam > 0.0)) throw ConfigError("pseudo.beam must be > 0");
    ChunkSpec spec = StreamingSpec();
    if (spec.IsFullContext()) throw ConfigError("chunk must be finite for streaming stages");
    GetBool("distill.mse_log_softmax");
    GetBool("distill.stop_history_grad");
    GetBool("train.checkpoint_every_epoch");
    GetBool("rtf.streaming");
    if (GetInt("rtf.runs") < 1) throw ConfigError("rtf.runs must be >= 1");
    if (Get("distill2.teacher") != "T" && Get("distill2.teacher") != "SN")
      throw ConfigError("distill2.teacher must be T or SN");
    if (GetInt("gradcheck.seeds") < 1) throw ConfigError("gradcheck.seeds must be >= 1");
    if (!(GetDouble("gradcheck.epsilon") > 0.0)) throw ConfigError("gradcheck.epsilon must be > 0");
    if (!(GetDouble("gradcheck.tolerance") > 0.0))
      throw ConfigError("gradcheck.tolerance must be > 0");
    const int pdfs = GetInt("task.num_phones");
    ModelConfig t = TeacherModel(pdfs), s = StudentModel(pdfs);
    t.Validate();
    s.Validate();
    StudentLayerMap(s.blocks, t.blocks).Validate(s.blocks, t.blocks);
  });
}

ToyTaskOptions ExperimentConfig::TaskOptions() const {
  ToyTaskOptions o;
  o.seed = Seed();
  o.num_words = GetInt("task.num_words");
  o.num_phones = GetInt("task.num_phones");
  o.labeled_n = GetInt("task.labeled_n");
  o.unlabeled_n = GetInt("task.unlabeled_n");
  o.test_n = GetInt("task.test_n");
  o.corpus_n = GetInt("task.corpus_n");
  o.sample_rate = GetInt("task.sample_rate");
  o.p_sil = GetDouble("task.p_sil");
  o.snr_db = GetDouble("task.snr_db");
  return o;
}

DenominatorOptions ExperimentConfig::DenOptions() const {
  DenominatorOptions o;
  o.ngram_order = GetInt("den.order");
  o.num_samples_per_sentence = GetInt("den.samples_per_sentence");
  o.backoff_mass = GetDouble("den.backoff_mass");
  o.p_sil = GetDouble("den.p_sil");
  o.seed = DeriveSeed(Seed(), 20);
  return o;
}

DecodingGraphOptions ExperimentConfig::DecodeOptions() const {
  DecodingGraphOptions o;
  o.backoff_mass = GetDouble("decode.backoff_mass");
  o.p_sil = GetDouble("decode.p_sil");
  return o;
}

ModelConfig ExperimentConfig::ModelByName(const std::string& name, int num_pdfs) const {
  if (!ModelNames().count(name)) SEQDISTILL_THROW(ConfigError, "unknown model '" << name << "'");
  ModelConfig c = DeskModelConfig(name, num_pdfs);
  c.sample_rate = GetInt("task.sample_rate");
  return c;
}

ModelConfig ExperimentConfig::TeacherModel(int num_pdfs) const {
  return ModelByName(Get("teacher.model"), num_pdfs);
}

ModelConfig ExperimentConfig::StudentModel(int num_pdfs) const {
  return ModelByName(Get("student.model"), num_pdfs);
}

ChunkSpec ExperimentConfig::StreamingSpec() const {
  ChunkSpec spec;
  try {
    spec.hist_frames = ParseFrames(Get("hist"));
    spec.chunk_frames = ParseFrames(Get("chunk"));
    spec.frame_duration_ms = TeacherModel(2).FrameDurationMs();
    spec.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

ObjectiveWeights ExperimentConfig::Weights() const {
  return {GetDouble("alpha"), GetDouble("beta")};
}

PseudoLabelOptions ExperimentConfig::PseudoOptions() const {
  return {GetInt("pseudo.nbest"), GetDouble("pseudo.beam")};
}

TrainOptions ExperimentConfig::CommonTrainOptions() const {
  TrainOptions o;
  o.accumulate = GetInt("train.accumulate");
  o.augment = GetBool("train.augment");
  o.augment_opts.p_apply = GetDouble("aug.p");
  o.augment_opts.vol_lo = GetDouble("aug.vol_lo");
  o.augment_opts.vol_hi = GetDouble("aug.vol_hi");
  o.augment_opts.pitch_lo = GetDouble("aug.pitch_lo");
  o.augment_opts.pitch_hi = GetDouble("aug.pitch_hi");
  o.normalize_mmi_by_frames = GetBool("train.mmi_per_frame");
  return o;
}

TrainOptions ExperimentConfig::TeacherTrainOptions() const {
  TrainOptions o = CommonTrainOptions();
  o.epochs = GetInt("teacher.epochs");
  o.peak_lr = GetDouble("teacher.lr");
  o.seed = DeriveSeed(Seed(), 21);
  return o;
}

TrainOptions ExperimentConfig::DistillTrainOptions(const std::string& stage) const {
  if (stage != "distill1" && stage != "distill2")
    SEQDISTILL_THROW(std::invalid_argument, "no training budget for stage " << stage);
  TrainOptions o = CommonTrainOptions();
  o.epochs = GetInt(stage + ".epochs");
  o.peak_lr = GetDouble(stage + ".lr");
  o.seed = DeriveSeed(Seed(), stage == "distill1" ? 22 : 24);
  return o;
}

LayerMap ExperimentConfig::StudentLayerMap(int student_blocks, int teacher_blocks) const {
  const std::string& v = Get("layer_map");
  return v == "auto" ? AutoLayerMap(student_blocks, teacher_blocks) : ParseLayerMap(v);
}

LayerMap AutoLayerMap(int student_blocks, int teacher_blocks) {
  if (student_blocks < 1 || teacher_blocks < 1)
    throw std::invalid_argument("layer map needs positive depths");
  const int half = teacher_blocks / 2;
  if (student_blocks <= half) {
    const int removed = half - student_blocks;
    std::set<int> skip;
    for (int k = 1; k <= removed; ++k)
      skip.insert(static_cast<int>(std::lround(static_cast<double>(k) * half / (removed + 1))));
    return DefaultLayerMap(half, teacher_blocks, skip, true);
  }
  LayerMap map;
  for (int i = 1; i <= student_blocks; ++i)
    map.pairs.push_back({i, (i * teacher_blocks + student_blocks - 1) / student_blocks});
  return map;
}

LayerMap ParseLayerMap(const std::string& text) {
  LayerMap map;
  for (const std::string& item : SplitCommas(text)) {
    const size_t colon = item.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(item);
      size_t u1 = 0, u2 = 0;
      const std::string a = item.substr(0, colon), b = item.substr(colon + 1);
      LayerPair p{std::stoi(a, &u1), std::stoi(b, &u2)};
      if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(item);
      map.pairs.push_back(p);
    } catch (const std::exception&) {
      SEQDISTILL_THROW(ConfigError, "layer_map: malformed pair '" << item << "'");
    }
  }
  if (map.pairs.empty()) throw ConfigError("layer_map is empty");
  return map;
}

std::string LayerMapToString(const LayerMap& map) {
  std::ostringstream os;
  for (size_t i = 0; i < map.pairs.size(); ++i)
    os << (i ? "," : "") << map.pairs[i].student << ':' << map.pairs[i].teacher;
  return os.str();
}

}  // namespace seqdistill
