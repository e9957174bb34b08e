// Copyright 2026 The avrnnt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avrnnt/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avrnnt/error.h"

namespace avrnnt::train {

using model::ModalitySwitch;
using model::ModelWeights;

void LrSchedule::validate() const {
  if (!(peak > 0.0) || warmup_steps < 0 || hold_steps < 0 || !(decay_half_life > 0.0)) {
    throw Error(ErrorCode::kConfigError, "invalid learning-rate schedule");
  }
}

double lr_at(int64_t step, const LrSchedule &s) {
  if (step < 0) throw Error(ErrorCode::kConfigError, "negative step");
  if (step < s.warmup_steps) {
    return s.peak * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  const int64_t past = step - s.warmup_steps - s.hold_steps;
  if (past <= 0) return s.peak;
  return s.peak * std::exp2(-static_cast<double>(past) / s.decay_half_life);
}

void DropoutPolicy::validate() const {
  auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!ok(p_drop_audio) || !ok(p_drop_video) || p_drop_audio + p_drop_video > 1.0 + 1e-12) {
    throw Error(ErrorCode::kConfigError, "dropout probabilities must lie in [0, 1] and sum to <= 1");
  }
}

ModalitySwitch draw_switch(const DropoutPolicy &policy, const ModalitySwitch &base,
                           std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Both draws always happen so the stream does not depend on the outcome.
  const double a = u(rng), v = u(rng);
  if (!(base.audio_on && base.video_on)) return base;
  if (a < policy.p_drop_audio) return {false, true};
  const double keep = 1.0 - policy.p_drop_audio;
  if (keep > 0.0 && v < policy.p_drop_video / keep) return {true, false};
  return base;
}

std::vector<ModalitySwitch> apply_modality_dropout(size_t batch_size, const DropoutPolicy &policy,
                                                   const ModalitySwitch &base,
                                                   std::mt19937_64 &rng) {
  policy.validate();
  std::vector<ModalitySwitch> out(batch_size);
  for (auto &sw : out) sw = draw_switch(policy, base, rng);
  return out;
}

void adam_step(ModelWeights &weights, const ModelWeights &grads, AdamState &state, double lr,
               const AdamOptions &o) {
  auto params = model::named_tensors(weights);
  const auto gs = model::named_tensors(grads);
  if (params.size() != gs.size()) throw Error(ErrorCode::kShapeError, "gradient layout mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].second->rows() != gs[i].second->rows() ||
        params[i].second->cols() != gs[i].second->cols()) {
      throw Error(ErrorCode::kShapeError, "gradient shape mismatch for " + params[i].first);
    }
    if (!gs[i].second->allFinite()) {
      throw Error(ErrorCode::kNonFiniteGradient, "non-finite gradient in " + params[i].first);
    }
  }
  if (state.m.empty()) {
    for (const auto &[name, p] : params) {
      state.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      state.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    const Matrix &g = *gs[i].second;
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g.cwiseProduct(g);
    params[i].second->array() -=
        lr * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + o.epsilon);
  }
}

model::ModelInput prepare_input(const dsp::Waveform &audio,
                                const std::optional<video::VideoClip> &clip,
                                const FeatureOptions &options) {
  dsp::FrontendConfig fc;
  fc.mode = options.mode;
  fc.num_filters = options.num_filters;
  if (clip) {
    fc.video_fps = clip->fps;
    fc.num_video_frames = clip->pixels.num_frames();
  }
  const dsp::FeatureSequence feats = dsp::featurize(audio, fc);
  model::ModelInput in;
  in.audio = feats.frames;
  if (options.normalize && in.audio.rows() > 1) {
    const RowVector mean = in.audio.colwise().mean();
    in.audio.rowwise() -= mean;
    const RowVector sd =
        (in.audio.array().square().colwise().mean().sqrt() + 1e-6).matrix();
    in.audio.array().rowwise() /= sd.array();
  }
  if (clip) {
    in.video = clip;
    const int64_t frames = clip->pixels.num_frames();
    in.video_index.resize(static_cast<size_t>(in.audio.rows()));
    for (Eigen::Index n = 0; n < in.audio.rows(); ++n) {
      int64_t idx = n;
      if (options.mode == dsp::FrameRateMode::kFixed10msDecimate3) {
        idx = static_cast<int64_t>(std::floor(feats.timestamps[n] * clip->fps.value()));
      }
      in.video_index[n] = static_cast<int>(std::clamp<int64_t>(idx, 0, frames - 1));
    }
  }
  return in;
}

BatchGradient batch_gradient(const model::TransducerModel &model,
                             const std::vector<const Example *> &batch,
                             const std::vector<ModalitySwitch> &switches, size_t micro_batch) {
  if (batch.size() != switches.size()) throw Error(ErrorCode::kShapeError, "one switch per example");
  BatchGradient out{model::zero_weights(model.config), 0.0};
  if (batch.empty()) return out;
  if (micro_batch == 0) micro_batch = batch.size();
  auto total = model::named_tensors(out.grads);
  for (size_t start = 0; start < batch.size(); start += micro_batch) {
    ModelWeights part = model::zero_weights(model.config);
    double part_loss = 0.0;
    for (size_t i = start; i < std::min(batch.size(), start + micro_batch); ++i) {
      const auto r = model::utterance_loss(batch[i]->input, batch[i]->labels, switches[i], model, &part);
      if (!std::isfinite(r.loss)) {
        throw Error(ErrorCode::kDivergence, "non-finite loss on utterance " + batch[i]->id);
      }
      part_loss += r.loss;
    }
    const auto pieces = model::named_tensors(part);
    for (size_t k = 0; k < total.size(); ++k) *total[k].second += *pieces[k].second;
    out.loss += part_loss;
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (auto &[name, t] : total) *t *= scale;
  out.loss *= scale;
  return out;
}

double global_norm(const ModelWeights &grads) {
  double acc = 0.0;
  for (const auto &[name, t] : model::named_tensors(grads)) acc += t->squaredNorm();
  return std::sqrt(acc);
}

namespace {

std::vector<std::string> as_tokens(const std::vector<int> &labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(std::to_string(l));
  return out;
}

}  // namespace

EvalResult evaluate(const model::TransducerModel &model, const std::vector<Example> &examples,
                    const ModalitySwitch &sw, int beam_width) {
  EvalResult out;
  for (const Example &ex : examples) {
    std::vector<int> hyp;
    if (ex.input.audio.rows() > 0) {
      hyp = model::decode(ex.input, sw, model, {beam_width, 10})[0].labels;
    }
    out.utterances.push_back(eval::word_error_rate(as_tokens(ex.labels), as_tokens(hyp)));
    out.hypotheses.push_back(std::move(hyp));
  }
  out.report = eval::aggregate(out.utterances);
  if (out.utterances.size() >= 2 && out.report.num_ref_words > 0) {
    std::vector<int64_t> errs, words;
    for (const auto &u : out.utterances) {
      errs.push_back(u.errors());
      words.push_back(u.num_ref_words);
    }
    out.report.ci_halfwidth_95 = eval::confidence_interval_95(errs, words);
  }
  return out;
}

TrainResult train(model::TransducerModel &model, const std::vector<Example> &train_set,
                  const std::vector<Example> &heldout, const TrainConfig &config,
                  const ProgressFn &progress, const EvalHook &on_eval) {
  config.schedule.validate();
  config.dropout.validate();
  if (train_set.empty()) throw Error(ErrorCode::kEmptyInput, "training set is empty");
  if (config.batch_size < 1 || config.steps < 0 || config.eval_every < 1) {
    throw Error(ErrorCode::kConfigError, "batch_size, steps and eval_every must be positive");
  }
  if (!config.modalities.any()) throw Error(ErrorCode::kInvalidSwitchState, "no modality enabled");

  std::vector<dsp::Waveform> pool;
  if (config.multistyle) {
    for (const Example &ex : train_set) {
      if (!ex.waveform) throw Error(ErrorCode::kConfigError, "multistyle needs raw waveforms");
      pool.push_back(*ex.waveform);
    }
  }

  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = order.size();

  TrainResult result;
  result.best_weights = model.weights;
  result.best_wer = HUGE_VAL;
  AdamState adam;
  for (int64_t step = 1; step <= config.steps; ++step) {
    std::vector<Example> augmented;
    augmented.reserve(static_cast<size_t>(config.batch_size));
    std::vector<const Example *> batch;
    for (int b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const Example &ex = train_set[order[cursor++]];
      if (config.multistyle) {
        const auto aug = eval::multistyle_augment(*ex.waveform, pool, rng, *config.multistyle);
        if (aug.augmented) {
          Example copy{ex.id, ex.labels, prepare_input(aug.audio, ex.input.video, config.features),
                       std::nullopt};
          augmented.push_back(std::move(copy));
          batch.push_back(&augmented.back());
          continue;
        }
      }
      batch.push_back(&ex);
    }
    const auto switches =
        apply_modality_dropout(batch.size(), config.dropout, config.modalities, rng);
    BatchGradient bg = batch_gradient(model, batch, switches);
    if (config.max_grad_norm > 0.0) {
      const double norm = global_norm(bg.grads);
      if (norm > config.max_grad_norm) {
        for (auto &[name, t] : model::named_tensors(bg.grads)) *t *= config.max_grad_norm / norm;
      }
    }
    const double lr = lr_at(step, config.schedule);
    adam_step(model.weights, bg.grads, adam, lr, config.adam);

    MetricsRow row{step, bg.loss, lr, std::nullopt};
    if (step % config.eval_every == 0 || step == config.steps) {
      if (!heldout.empty()) {
        const double wer = evaluate(model, heldout, config.modalities, config.eval_beam).report.wer;
        row.heldout_wer = wer;
        if (wer < result.best_wer) {
          result.best_wer = wer;
          result.best_step = step;
          result.best_weights = model.weights;
        }
      } else {
        result.best_step = step;
        result.best_weights = model.weights;
      }
      if (on_eval) on_eval(row, model);
    }
    result.metrics.push_back(row);
    if (progress) progress(row);
  }
  if (config.steps == 0 || heldout.empty()) result.best_wer = 0.0;
  model.weights = result.best_weights;
  return result;
}

}  // namespace avrnnt::train
