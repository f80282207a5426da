// src/model/acoustic-model.cc

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

#include "model/acoustic-model.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "base/error.h"
#include "base/random.h"

namespace seqdistill {

namespace {

constexpr char kMagic[8] = {'S', 'Q', 'D', 'M', 'O', 'D', 'E', 'L'};
constexpr uint32_t kVersion = 1;

std::string CnnName(int layer, const char* what) {
  return "cnn" + std::to_string(layer + 1) + "." + what;
}

std::string BlockName(int block, const char* what) {
  return "block" + std::to_string(block + 1) + "." + what;
}

Tensor UniformWeight(Rng* rng, int rows, int cols, int fan_in) {
  Tensor w = Tensor::Zeros({rows, cols});
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (size_t i = 0; i < w.Size(); ++i) w[i] = rng->Uniform(-bound, bound);
  return w;
}

}  // namespace

void AcousticModel::Add(const std::string& name, Tensor value) {
  index_[name] = static_cast<int>(params_.size());
  names_.push_back(name);
  params_.push_back(std::move(value));
}

AcousticModel::AcousticModel(const ModelConfig& config, uint64_t seed) : config_(config) {
  config_.Validate();
  Rng rng(seed);
  int c_in = 1;
  for (int i = 0; i < config_.CnnLayers(); ++i) {
    int c_out = config_.CnnChannels(i);
    int fan_in = config_.cnn_kernels[i] * c_in;
    Add(CnnName(i, "weight"), UniformWeight(&rng, fan_in, c_out, fan_in));
    Add(CnnName(i, "bias"), Tensor::Zeros({c_out}));
    Add(CnnName(i, "norm_gain"), Tensor::Filled({c_out}, 1.0));
    Add(CnnName(i, "norm_bias"), Tensor::Zeros({c_out}));
    c_in = c_out;
  }
  const int d = config_.encoder_dim, f = config_.ffn_dim;
  Add("proj.weight", UniformWeight(&rng, c_in, d, c_in));
  Add("proj.bias", Tensor::Zeros({d}));
  for (int b = 0; b < config_.blocks; ++b) {
    Add(BlockName(b, "ln1_gain"), Tensor::Filled({d}, 1.0));
    Add(BlockName(b, "ln1_bias"), Tensor::Zeros({d}));
    for (const char* w : {"wq", "wk", "wv", "wo"}) {
      Add(BlockName(b, w), UniformWeight(&rng, d, d, d));
      Add(BlockName(b, (std::string(w) + "_bias").c_str()), Tensor::Zeros({d}));
    }
    Add(BlockName(b, "ln2_gain"), Tensor::Filled({d}, 1.0));
    Add(BlockName(b, "ln2_bias"), Tensor::Zeros({d}));
    Add(BlockName(b, "ffn1"), UniformWeight(&rng, d, f, d));
    Add(BlockName(b, "ffn1_bias"), Tensor::Zeros({f}));
    Add(BlockName(b, "ffn2"), UniformWeight(&rng, f, d, f));
    Add(BlockName(b, "ffn2_bias"), Tensor::Zeros({d}));
  }
  Add("pred.weight", UniformWeight(&rng, d, config_.num_pdfs, d));
  Add("pred.bias", Tensor::Zeros({config_.num_pdfs}));
}

int AcousticModel::ParamIndex(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no model parameter named '" + name + "'");
  return it->second;
}

int64_t AcousticModel::NumScalars() const {
  int64_t n = 0;
  for (const Tensor& p : params_) n += static_cast<int64_t>(p.Size());
  return n;
}

bool AcousticModel::BitwiseEqual(const AcousticModel& other) const {
  if (!(config_ == other.config_) || names_ != other.names_) return false;
  for (size_t i = 0; i < params_.size(); ++i)
    if (!params_[i].BitwiseEqual(other.params_[i])) return false;
  return true;
}

namespace {

void PutU32(std::string* out, uint32_t v) { out->append(reinterpret_cast<const char*>(&v), 4); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  void Take(void* dst, size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error("checkpoint truncated");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  uint32_t U32() {
    uint32_t v;
    Take(&v, 4);
    return v;
  }
  std::string Str() {
    std::string s(U32(), '\0');
    Take(s.data(), s.size());
    return s;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string AcousticModel::Serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  PutU32(&out, kVersion);
  std::string cfg = config_.ToText();
  PutU32(&out, static_cast<uint32_t>(cfg.size()));
  out += cfg;
  PutU32(&out, static_cast<uint32_t>(params_.size()));
  for (size_t i = 0; i < params_.size(); ++i) {
    PutU32(&out, static_cast<uint32_t>(names_[i].size()));
    out += names_[i];
    const auto& shape = params_[i].Shape();
    PutU32(&out, static_cast<uint32_t>(shape.size()));
    for (int d : shape) PutU32(&out, static_cast<uint32_t>(d));
    out.append(reinterpret_cast<const char*>(params_[i].Ptr()), params_[i].Size() * sizeof(double));
  }
  return out;
}

AcousticModel AcousticModel::Deserialize(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.Take(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("not a model checkpoint");
  uint32_t version = r.U32();
  if (version != kVersion)
    SEQDISTILL_THROW(std::runtime_error, "unsupported checkpoint version " << version);
  ModelConfig config = ModelConfig::FromText(r.Str());
  // The layout must be exactly what this config produces.
  AcousticModel reference(config, 0);
  uint32_t n = r.U32();
  if (n != reference.params_.size())
    SEQDISTILL_THROW(std::runtime_error, "checkpoint has " << n << " tensors, config expects "
                                                           << reference.params_.size());
  AcousticModel model;
  model.config_ = config;
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.Str();
    std::vector<int> shape(r.U32());
    for (int& d : shape) d = static_cast<int>(r.U32());
    if (name != reference.names_[i] || shape != reference.params_[i].Shape())
      SEQDISTILL_THROW(std::runtime_error, "checkpoint tensor " << i << " '" << name
                                               << "' does not match the config layout");
    Tensor t = Tensor::Zeros(shape);
    r.Take(t.MutablePtr(), t.Size() * sizeof(double));
    model.Add(name, std::move(t));
  }
  if (!r.AtEnd()) throw std::runtime_error("checkpoint has trailing bytes");
  return model;
}

void AcousticModel::Save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) SEQDISTILL_THROW(std::runtime_error, "cannot write " << path);
  std::string bytes = Serialize();
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) SEQDISTILL_THROW(std::runtime_error, "write failed for " << path);
}

AcousticModel AcousticModel::Load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) SEQDISTILL_THROW(std::runtime_error, "cannot read " << path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return Deserialize(ss.str());
}

BoundModel::BoundModel(const AcousticModel& model, Tape* tape, bool trainable, int id_offset)
    : model_(&model), tape_(tape) {
  vars_.reserve(model.NumParams());
  for (int i = 0; i < model.NumParams(); ++i)
    vars_.push_back(trainable ? tape->Variable(model.Param(i), id_offset + i)
                              : tape->Constant(model.Param(i)));
}

BoundModel::BoundModel(const AcousticModel& model, Tape* tape, std::vector<Var> vars)
    : model_(&model), tape_(tape), vars_(std::move(vars)) {
  if (static_cast<int>(vars_.size()) != model.NumParams())
    SEQDISTILL_THROW(std::invalid_argument, "bound model needs " << model.NumParams()
                                                << " handles, got " << vars_.size());
}

Tensor WaveformTensor(std::span<const float> samples) {
  Tensor t = Tensor::Zeros({static_cast<int>(samples.size()), 1});
  for (size_t i = 0; i < samples.size(); ++i) t[i] = samples[i];
  return t;
}

int CnnShift(const ModelConfig& config, int layer) {
  if (config.causal_cnn) return 0;
  return (config.cnn_kernels[layer] - config.cnn_strides[layer]) / 2;
}

Var CnnLayer(const BoundModel& m, int layer, Var x, int shift) {
  const ModelConfig& c = m.Config();
  Var y = Conv1d(x, m[CnnName(layer, "weight")], c.cnn_strides[layer], c.cnn_kernels[layer], shift);
  y = AddBias(y, m[CnnName(layer, "bias")]);
  Var gain = m[CnnName(layer, "norm_gain")], bias = m[CnnName(layer, "norm_bias")];
  y = c.group_norm ? GroupNorm(y, gain, bias, c.norm_groups) : LayerNorm(y, gain, bias);
  return Gelu(y);
}

Var CnnEncode(const BoundModel& m, Var waveform) {
  const ModelConfig& c = m.Config();
  const Tensor& w = waveform.value();
  if (w.NumDims() != 2 || w.Cols() != 1)
    SEQDISTILL_THROW(ShapeError, "waveform must be [N x 1], got " << w.ShapeString());
  if (w.Rows() < c.TotalStride())
    SEQDISTILL_THROW(std::invalid_argument, "waveform of " << w.Rows()
                                                << " samples is shorter than one frame ("
                                                << c.TotalStride() << " samples)");
  Var x = waveform;
  for (int i = 0; i < c.CnnLayers(); ++i) x = CnnLayer(m, i, x, CnnShift(c, i));
  return x;
}

Var InputProjection(const BoundModel& m, Var features) {
  return AddBias(MatMul(features, m["proj.weight"]), m["proj.bias"]);
}

Var TransformerBlock(const BoundModel& m, int block, Var x_query, Var x_context,
                     const std::shared_ptr<const AttentionMask>& mask) {
  const ModelConfig& c = m.Config();
  auto p = [&](const char* what) { return m[BlockName(block, what)]; };
  const int d = c.encoder_dim, heads = c.heads, dh = d / heads;
  if (mask && mask->size() != x_query.value().Rows() * static_cast<size_t>(x_context.value().Rows()))
    SEQDISTILL_THROW(ShapeError, "attention mask has " << mask->size() << " entries for "
                                                       << x_query.value().Rows() << " x "
                                                       << x_context.value().Rows() << " scores");
  Var hq = LayerNorm(x_query, p("ln1_gain"), p("ln1_bias"));
  Var hc = x_context.index() == x_query.index() ? hq
                                                : LayerNorm(x_context, p("ln1_gain"), p("ln1_bias"));
  Var q = AddBias(MatMul(hq, p("wq")), p("wq_bias"));
  Var k = AddBias(MatMul(hc, p("wk")), p("wk_bias"));
  Var v = AddBias(MatMul(hc, p("wv")), p("wv_bias"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  for (int h = 0; h < heads; ++h) {
    Var qh = Slice(q, 1, h * dh, (h + 1) * dh);
    Var kh = Slice(k, 1, h * dh, (h + 1) * dh);
    Var vh = Slice(v, 1, h * dh, (h + 1) * dh);
    Var scores = Scale(MatMul(qh, Transpose(kh)), scale);
    outs.push_back(MatMul(SoftmaxRows(scores, mask), vh));
  }
  Var attn = heads == 1 ? outs[0] : Concat(outs, 1);
  Var y = Add(x_query, AddBias(MatMul(attn, p("wo")), p("wo_bias")));
  Var h2 = LayerNorm(y, p("ln2_gain"), p("ln2_bias"));
  Var ff = Gelu(AddBias(MatMul(h2, p("ffn1")), p("ffn1_bias")));
  return Add(y, AddBias(MatMul(ff, p("ffn2")), p("ffn2_bias")));
}

Var PredictionLayer(const BoundModel& m, Var hidden) {
  return AddBias(MatMul(hidden, m["pred.weight"]), m["pred.bias"]);
}

ModelOutputs Forward(const BoundModel& m, const Tensor& waveform,
                     const std::shared_ptr<const AttentionMask>& mask) {
  Var x = InputProjection(m, CnnEncode(m, m.GetTape()->Constant(waveform)));
  size_t l = x.value().Rows();
  if (mask && mask->size() != l * l)
    SEQDISTILL_THROW(ShapeError, "attention mask has " << mask->size() << " entries for " << l
                                                       << " frames");
  ModelOutputs out;
  for (int b = 0; b < m.Config().blocks; ++b) {
    x = TransformerBlock(m, b, x, x, mask);
    out.hiddens.push_back(x);
  }
  out.output = PredictionLayer(m, x);
  return out;
}

ModelValues RunModel(const AcousticModel& model, const Tensor& waveform,
                     const std::shared_ptr<const AttentionMask>& mask) {
  Tape tape;
  BoundModel m(model, &tape, false);
  ModelOutputs out = Forward(m, waveform, mask);
  ModelValues values;
  for (Var h : out.hiddens) values.hiddens.push_back(h.value());
  values.output = out.output.value();
  return values;
}

AcousticModel ShareTeacherParams(const AcousticModel& teacher, const ModelConfig& student_config,
                                 uint64_t seed) {
  const ModelConfig& tc = teacher.Config();
  if (tc.num_pdfs != student_config.num_pdfs)
    SEQDISTILL_THROW(std::invalid_argument, "cannot share parameters: teacher has "
                                                << tc.num_pdfs << " pdfs, student "
                                                << student_config.num_pdfs);
  if (tc.cnn_kernels != student_config.cnn_kernels || tc.cnn_strides != student_config.cnn_strides)
    throw std::invalid_argument("cannot share parameters: CNN kernels or strides differ");
  if (tc.CnnLayers() > 2 && tc.cnn_channels_rest != student_config.cnn_channels_rest)
    throw std::invalid_argument("cannot share parameters: CNN channels beyond layer 2 differ");

  AcousticModel student(student_config, seed);
  const ModelConfig& sc = student.Config();
  bool first_two_match = tc.cnn_channels_first_two == sc.cnn_channels_first_two;
  for (int i = 0; i < sc.CnnLayers(); ++i) {
    if (i < 2 && !first_two_match) continue;
    for (const char* what : {"bias", "norm_gain", "norm_bias"})
      student.MutableParam(CnnName(i, what)) = teacher.Param(CnnName(i, what));
    const Tensor& tw = teacher.Param(CnnName(i, "weight"));
    Tensor& sw = student.MutableParam(CnnName(i, "weight"));
    if (tw.SameShape(sw)) {
      sw = tw;
      continue;
    }
    // Layer fed by narrower fresh layers: keep the teacher's kernel taps
    // for the input channels the student has.
    int c_in_t = tc.CnnChannels(i - 1), c_in_s = sc.CnnChannels(i - 1);
    if (c_in_s > c_in_t)
      SEQDISTILL_THROW(std::invalid_argument, "cannot share CNN layer " << i + 1
                                                  << ": student has more input channels");
    for (int k = 0; k < sc.cnn_kernels[i]; ++k)
      for (int ch = 0; ch < c_in_s; ++ch)
        for (int o = 0; o < sw.Cols(); ++o) sw(k * c_in_s + ch, o) = tw(k * c_in_t + ch, o);
  }
  if (tc.encoder_dim == sc.encoder_dim) {
    student.MutableParam("pred.weight") = teacher.Param("pred.weight");
    student.MutableParam("pred.bias") = teacher.Param("pred.bias");
  }
  return student;
}

AcousticModel InitStreamingFrom(const AcousticModel& non_streaming) { return non_streaming; }

}  // namespace seqdistill
