// src/train/trainer.cc

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

#include "train/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

#include "base/error.h"
#include "fst/decoder.h"
#include "fst/graph-builder.h"

namespace seqdistill {

void TrainOptions::Validate() const {
  if (epochs < 0) SEQDISTILL_THROW(std::invalid_argument, "epochs must be >= 0, got " << epochs);
  if (accumulate < 1)
    SEQDISTILL_THROW(std::invalid_argument, "accumulate must be >= 1, got " << accumulate);
  if (!(peak_lr > 0.0)) SEQDISTILL_THROW(std::invalid_argument, "peak_lr must be > 0");
  if (augment) augment_opts.Validate();
  TriStateSchedule probe{peak_lr, 1, warmup_frac, hold_frac, final_scale};
  probe.Validate();
}

int TrainOptions::StepsPerEpoch(int num_utterances) const {
  return (num_utterances + accumulate - 1) / accumulate;
}

TriStateSchedule TrainOptions::Schedule(int num_utterances) const {
  return {peak_lr, std::max(1, epochs * StepsPerEpoch(num_utterances)), warmup_frac, hold_frac,
          final_scale};
}

namespace {

struct UttLoss {
  Var total;
  std::optional<double> hidden;
  std::optional<double> pred;
};

// Loss of one utterance, or nullopt to skip it. `augmented` is false only
// when `samples` equal the stored audio.
using LossFn = std::function<std::optional<UttLoss>(const BoundModel& model,
                                                    std::span<const Var> extras, int index,
                                                    const std::vector<float>& samples,
                                                    bool augmented)>;

double Mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// Epoch-major loop over seeded shuffles; `extras` are trained alongside the
// model with gradient ids following its parameters.
RunReport TrainLoop(AcousticModel* model, std::vector<Tensor>* extras,
                    const std::vector<Utterance>& utts, const TrainOptions& opts,
                    const LossFn& loss_fn, int* num_skipped) {
  opts.Validate();
  RunReport report;
  if (num_skipped) *num_skipped = 0;
  if (opts.epochs == 0) return report;
  if (utts.empty()) throw std::invalid_argument("training set is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(utts.size());
  const int num_params = model->NumParams();

  std::vector<Tensor*> params;
  for (int i = 0; i < num_params; ++i) params.push_back(&model->MutableParam(i));
  for (Tensor& e : *extras) params.push_back(&e);
  Adam adam(params, opts.adam);
  const TriStateSchedule schedule = opts.Schedule(n);
  std::vector<Tensor> grad_sum;
  for (Tensor* p : params) grad_sum.emplace_back(p->Shape());

  std::set<std::string> skipped;
  int step = 0;
  std::vector<double> epoch_totals;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(DeriveSeed(opts.seed, 1000 + epoch));
    for (int i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.UniformInt(i + 1)]);

    epoch_totals.clear();
    for (int begin = 0; begin < n; begin += opts.accumulate) {
      ++step;
      const double lr = LrAt(step, schedule);
      for (Tensor& g : grad_sum) g.SetZero();
      int count = 0;
      std::vector<double> totals, hiddens, preds;
      for (int k = begin; k < std::min(n, begin + opts.accumulate); ++k) {
        const int index = order[k];
        const Utterance& u = utts[index];
        std::vector<float> samples = u.samples;
        bool augmented = false;
        if (opts.augment) {
          Rng aug_rng(DeriveSeed(DeriveSeed(opts.seed, 2000 + epoch), index));
          samples = Augment(u.samples, &aug_rng, opts.augment_opts);
          augmented = samples != u.samples;
        }
        Tape tape;
        BoundModel bound(*model, &tape, true, 0);
        std::vector<Var> extra_vars;
        for (size_t j = 0; j < extras->size(); ++j)
          extra_vars.push_back(tape.Variable((*extras)[j], num_params + static_cast<int>(j)));
        std::optional<UttLoss> loss;
        try {
          loss = loss_fn(bound, extra_vars, index, samples, augmented);
        } catch (const SupervisionMismatchError& e) {
          if (opts.log && !skipped.count(u.id))
            *opts.log << "warning: skipping " << u.id << ": " << e.what() << '\n';
        }
        if (!loss) {
          skipped.insert(u.id);
          continue;
        }
        const double total = loss->total.value().Item();
        if (!std::isfinite(total))
          SEQDISTILL_THROW(std::runtime_error,
                           "non-finite loss on " << u.id << " at step " << step);
        GradientMap grads = tape.Backward(loss->total);
        for (auto& [id, g] : grads) grad_sum[id].AddInPlace(g);
        ++count;
        totals.push_back(total);
        if (loss->hidden) hiddens.push_back(*loss->hidden);
        if (loss->pred) preds.push_back(*loss->pred);
      }
      if (count == 0) continue;
      for (Tensor& g : grad_sum) g.ScaleInPlace(1.0 / count);
      adam.Step(grad_sum, lr);
      StepRecord rec{step, lr, Mean(totals), std::nullopt, std::nullopt};
      if (!hiddens.empty()) rec.hidden = Mean(hiddens);
      if (!preds.empty()) rec.pred = Mean(preds);
      report.steps.push_back(rec);
      epoch_totals.push_back(rec.total);
    }
    if (epoch_totals.empty())
      throw std::runtime_error("every training utterance was skipped");
    if (opts.log)
      *opts.log << "epoch " << epoch + 1 << "/" << opts.epochs << " loss " << Mean(epoch_totals)
                << '\n';
    if (opts.on_epoch) opts.on_epoch(epoch + 1, *model);
  }
  if (num_skipped) *num_skipped = static_cast<int>(skipped.size());
  report.AddSummary("epochs", static_cast<double>(opts.epochs));
  report.AddSummary("steps", static_cast<double>(step));
  report.AddSummary("skipped_utterances", static_cast<double>(skipped.size()));
  report.AddSummary("final_epoch_loss", Mean(epoch_totals));
  report.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace

TeacherResult TrainTeacher(const std::vector<Utterance>& labeled, const Lexicon& lexicon,
                           const ModelConfig& config, const Wfst& den, const TrainOptions& opts) {
  if (config.num_pdfs != lexicon.NumPhones())
    SEQDISTILL_THROW(std::invalid_argument, "model has " << config.num_pdfs
                                                         << " outputs but the lexicon has "
                                                         << lexicon.NumPhones() << " phones");
  const HmmTopology topo(lexicon.NumPhones());
  std::vector<Wfst> numerators;
  for (const Utterance& u : labeled) {
    if (!u.HasTranscript())
      SEQDISTILL_THROW(std::invalid_argument, "utterance " << u.id << " has no transcript");
    numerators.push_back(NumeratorFromTranscript(u.transcript, lexicon, topo, true));
  }
  TeacherResult result{AcousticModel(config, DeriveSeed(opts.seed, 7)), {}, 0};
  std::vector<Tensor> no_extras;
  auto loss_fn = [&](const BoundModel& m, std::span<const Var>, int index,
                     const std::vector<float>& samples, bool) -> std::optional<UttLoss> {
    ModelOutputs out = Forward(m, WaveformTensor(samples));
    UttLoss loss;
    loss.total = MmiLoss(out.output, numerators[index], den, opts.normalize_mmi_by_frames);
    loss.pred = loss.total.value().Item();
    return loss;
  };
  result.report = TrainLoop(&result.model, &no_extras, labeled, opts, loss_fn, &result.skipped);
  return result;
}

Wfst PseudoNumerator(const Tensor& loglikes, const Wfst& den, const PseudoLabelOptions& opts) {
  if (opts.nbest < 1)
    SEQDISTILL_THROW(std::invalid_argument, "nbest must be >= 1, got " << opts.nbest);
  Lattice lat = DecodeNbest(den, loglikes, opts.nbest, opts.beam);
  if (lat.Empty())
    throw SupervisionMismatchError("denominator graph accepts no path of this length");
  return NumeratorFromLattice(lat, false);
}

PseudoSupervision MakePseudoSupervision(const AcousticModel& teacher,
                                        const std::vector<Utterance>& utterances, const Wfst& den,
                                        const PseudoLabelOptions& opts, std::ostream* log) {
  PseudoSupervision sup;
  for (const Utterance& u : utterances) {
    Tensor out = RunModel(teacher, WaveformTensor(u.samples)).output;
    try {
      sup.numerators.emplace(u.id, PseudoNumerator(out, den, opts));
    } catch (const SupervisionMismatchError& e) {
      ++sup.skipped;
      if (log) *log << "warning: no pseudo-label for " << u.id << ": " << e.what() << '\n';
    }
  }
  return sup;
}

void SavePseudoSupervision(const PseudoSupervision& sup, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir + "/index.txt");
  if (!index) SEQDISTILL_THROW(std::runtime_error, "cannot write " << dir << "/index.txt");
  for (const auto& [id, fst] : sup.numerators) {
    fst.WriteFile(dir + "/" + id + ".fst");
    index << id << '\n';
  }
  index << "skipped " << sup.skipped << '\n';
}

PseudoSupervision LoadPseudoSupervision(const std::string& dir) {
  std::ifstream index(dir + "/index.txt");
  if (!index) SEQDISTILL_THROW(std::runtime_error, "cannot read " << dir << "/index.txt");
  PseudoSupervision sup;
  std::string id;
  while (index >> id) {
    if (id == "skipped") {
      index >> sup.skipped;
      continue;
    }
    sup.numerators.emplace(id, Wfst::ReadFile(dir + "/" + id + ".fst"));
  }
  return sup;
}

void DistillConfig::Validate(const ModelConfig& teacher, const ModelConfig& student) const {
  weights.Validate();
  train.Validate();
  chunk.Validate();
  if (teacher.num_pdfs != student.num_pdfs)
    throw std::invalid_argument("teacher and student differ in output dimension");
  if (weights.alpha < 1.0) {
    if (layer_map.pairs.empty())
      throw std::invalid_argument("hidden-layer loss needs a non-empty layer map");
    layer_map.Validate(student.blocks, teacher.blocks);
  }
}

DistillResult DistillStep(const AcousticModel& teacher, const AcousticModel& student,
                          const PseudoSupervision& supervision,
                          const std::vector<Utterance>& utterances, const Wfst& den,
                          const DistillConfig& cfg, const std::vector<Tensor>* projections) {
  cfg.Validate(teacher.Config(), student.Config());
  DistillResult result{student, {}, {}};
  const bool use_hidden = cfg.weights.alpha < 1.0;
  const bool use_pred = cfg.weights.alpha > 0.0;
  const bool use_mmi = use_pred && cfg.weights.beta > 0.0;
  if (projections) {
    if (projections->size() != cfg.layer_map.pairs.size())
      throw std::invalid_argument("one projection per layer pair is required");
    for (const Tensor& p : *projections)
      if (p.NumDims() != 2 || p.Rows() != student.Config().encoder_dim ||
          p.Cols() != teacher.Config().encoder_dim)
        SEQDISTILL_THROW(ShapeError, "projection " << p.ShapeString() << " does not map width "
                                                   << student.Config().encoder_dim << " to "
                                                   << teacher.Config().encoder_dim);
    result.projections = *projections;
  } else if (use_hidden) {
    Rng rng(DeriveSeed(cfg.train.seed, 9));
    result.projections = InitProjections(cfg.layer_map, student.Config().encoder_dim,
                                         teacher.Config().encoder_dim, &rng);
  }

  std::set<int> needed;
  for (const LayerPair& p : cfg.layer_map.pairs) needed.insert(p.teacher - 1);
  auto teacher_values = [&](const std::vector<float>& samples) {
    ModelValues v = RunModel(teacher, WaveformTensor(samples));
    if (!use_hidden) v.hiddens.clear();
    for (size_t b = 0; b < v.hiddens.size(); ++b)
      if (!needed.count(static_cast<int>(b))) v.hiddens[b] = Tensor();
    return v;
  };
  std::vector<std::optional<ModelValues>> cache(utterances.size());
  const PredictionLossOptions pred_opts{cfg.weights.beta, cfg.train.normalize_mmi_by_frames,
                                        cfg.mse_on_log_softmax};
  const Wfst no_numerator;

  auto loss_fn = [&](const BoundModel& m, std::span<const Var> extras, int index,
                     const std::vector<float>& samples,
                     bool augmented) -> std::optional<UttLoss> {
    ModelValues fresh;
    const ModelValues* tv;
    if (augmented) {
      fresh = teacher_values(samples);
      tv = &fresh;
    } else {
      if (!cache[index]) cache[index] = teacher_values(samples);
      tv = &*cache[index];
    }
    const Wfst* numerator = &no_numerator;
    Wfst relabeled;
    if (use_mmi) {
      if (augmented) {
        relabeled = PseudoNumerator(tv->output, den, cfg.relabel);
        numerator = &relabeled;
      } else {
        auto it = supervision.numerators.find(utterances[index].id);
        if (it == supervision.numerators.end()) return std::nullopt;
        numerator = &it->second;
      }
    }
    ModelOutputs so =
        ChunkedForward(m, WaveformTensor(samples), cfg.chunk, cfg.stop_history_gradient);
    UttLoss loss;
    Var hidden, pred;
    if (use_hidden) {
      hidden = HiddenLoss(so.hiddens, tv->hiddens, cfg.layer_map, extras);
      loss.hidden = hidden.value().Item();
    }
    if (use_pred) {
      pred = PredictionLoss(so.output, tv->output, *numerator, den, pred_opts);
      loss.pred = pred.value().Item();
    }
    loss.total = TotalLoss(hidden, pred, cfg.weights.alpha);
    return loss;
  };
  int skipped = 0;
  result.report = TrainLoop(&result.student, &result.projections, utterances, cfg.train,
                            loss_fn, &skipped);
  if (cfg.train.epochs > 0) {
    result.report.AddSummary("alpha", cfg.weights.alpha);
    result.report.AddSummary("beta", cfg.weights.beta);
    result.report.AddSummary("chunk", cfg.chunk.ToString());
  }
  return result;
}

Tensor ModelOutput(const AcousticModel& model, std::span<const float> samples,
                   const ChunkSpec& spec) {
  spec.Validate();
  Tensor wav = WaveformTensor(samples);
  if (spec.IsFullContext()) return RunModel(model, wav).output;
  const int frames = static_cast<int>(samples.size()) / model.Config().TotalStride();
  auto mask = std::make_shared<const AttentionMask>(BuildChunkMask(frames, spec));
  return RunModel(model, wav, mask).output;
}

double EvaluateWer(const AcousticModel& model, const std::vector<Utterance>& test,
                   const Wfst& graph, const ChunkSpec& spec, WerAccumulator* details) {
  if (test.empty()) throw std::invalid_argument("test set is empty");
  WerAccumulator acc;
  for (const Utterance& u : test) {
    if (!u.HasTranscript())
      SEQDISTILL_THROW(std::invalid_argument, "test utterance " << u.id << " has no transcript");
    acc.Add(u.transcript, ViterbiDecode(graph, ModelOutput(model, u.samples, spec)).words);
  }
  if (details) *details = acc;
  return acc.Wer();
}

std::vector<double> BenchRtf(const std::vector<const AcousticModel*>& models,
                             const std::vector<Utterance>& utterances, const ChunkSpec& spec,
                             int sample_rate, int runs) {
  spec.Validate();
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (sample_rate < 1) throw std::invalid_argument("sample_rate must be >= 1");
  double audio_s = 0.0;
  for (const Utterance& u : utterances) audio_s += static_cast<double>(u.samples.size());
  audio_s /= sample_rate;
  if (audio_s < 10.0)
    SEQDISTILL_THROW(std::invalid_argument,
                     "RTF needs at least 10 s of audio, got " << audio_s << " s");
  auto run_once = [&](const AcousticModel& m, const Utterance& u) {
    if (spec.IsFullContext()) return RunModel(m, WaveformTensor(u.samples)).output.Rows();
    VectorSource source(u.samples);
    return StreamInfer(m, &source, spec).Rows();
  };
  // Untimed warm-up so allocator and cache state do not favor later models.
  for (const AcousticModel* m : models) run_once(*m, utterances.front());

  // Every utterance is run by every model back to back, with the starting
  // model rotating, so machine load drifting during a pass hits all models
  // alike.
  const size_t n = models.size();
  std::vector<std::vector<double>> seconds(n);
  for (int r = 0; r < runs; ++r) {
    std::vector<double> pass(n, 0.0);
    for (size_t j = 0; j < utterances.size(); ++j)
      for (size_t k = 0; k < n; ++k) {
        const size_t i = (j + k) % n;
        const auto t0 = std::chrono::steady_clock::now();
        run_once(*models[i], utterances[j]);
        pass[i] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
    for (size_t i = 0; i < n; ++i) seconds[i].push_back(pass[i]);
  }
  std::vector<double> rtf;
  for (auto& s : seconds) {
    std::sort(s.begin(), s.end());
    rtf.push_back(s[s.size() / 2] / audio_s);
  }
  return rtf;
}

}  // namespace seqdistill
