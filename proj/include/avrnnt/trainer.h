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

// Training: learning-rate schedules, sentence-level modality dropout, Adam,
// and the loop that selects the checkpoint with the best held-out WER.

#ifndef AVRNNT_TRAINER_H_
#define AVRNNT_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "avrnnt/audio_frontend.h"
#include "avrnnt/corruption.h"
#include "avrnnt/rnnt_model.h"

namespace avrnnt::train {

struct LrSchedule {
  double peak = 2e-3;
  int64_t warmup_steps = 20000;
  int64_t hold_steps = 50000;
  // The rate halves every decay_half_life steps once the hold ends.
  double decay_half_life = 50000.0;

  static LrSchedule standard() { return {}; }
  // 4e-3 held until step 100k, used with modality dropout.
  static LrSchedule dropout() { return {4e-3, 20000, 80000, 50000.0}; }
  void validate() const;
};

double lr_at(int64_t step, const LrSchedule &schedule);

// Marginal per-utterance drop rates. Audio is drawn first and video is drawn
// only when audio was kept, with its conditional rate raised so the marginal
// stays at p_drop_video. Both are never dropped together.
struct DropoutPolicy {
  double p_drop_audio = 0.0;
  double p_drop_video = 0.0;

  void validate() const;
};

model::ModalitySwitch draw_switch(const DropoutPolicy &policy, const model::ModalitySwitch &base,
                                  std::mt19937_64 &rng);

std::vector<model::ModalitySwitch> apply_modality_dropout(size_t batch_size,
                                                          const DropoutPolicy &policy,
                                                          const model::ModalitySwitch &base,
                                                          std::mt19937_64 &rng);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  int64_t step = 0;
};

// One bias-corrected Adam update. Throws NonFiniteGradient before touching
// anything if a gradient entry is NaN or infinite.
void adam_step(model::ModelWeights &weights, const model::ModelWeights &grads, AdamState &state,
               double lr, const AdamOptions &options = {});

// Features the model consumes, derived from raw media.
struct FeatureOptions {
  dsp::FrameRateMode mode = dsp::FrameRateMode::kVariableThirdOfVideoFrame;
  int num_filters = dsp::kNumFilters;
  bool normalize = true;  // per-utterance mean and variance normalization
};

// Featurizes the audio and pairs every audio frame with a video frame: one to
// one in variable mode, nearest frame centre in fixed mode.
model::ModelInput prepare_input(const dsp::Waveform &audio,
                                const std::optional<video::VideoClip> &clip,
                                const FeatureOptions &options);

struct Example {
  std::string id;
  std::vector<int> labels;
  model::ModelInput input;
  // Raw media, kept when training needs to re-featurize augmented audio.
  std::optional<dsp::Waveform> waveform;
};

struct BatchGradient {
  model::ModelWeights grads;
  double loss = 0.0;  // mean over the batch
};

// Mean loss and gradient over the batch, accumulated in micro-batches.
BatchGradient batch_gradient(const model::TransducerModel &model,
                             const std::vector<const Example *> &batch,
                             const std::vector<model::ModalitySwitch> &switches,
                             size_t micro_batch = 0);

double global_norm(const model::ModelWeights &grads);

struct EvalResult {
  eval::WerReport report;
  std::vector<eval::WerReport> utterances;
  std::vector<std::vector<int>> hypotheses;
};

EvalResult evaluate(const model::TransducerModel &model, const std::vector<Example> &examples,
                    const model::ModalitySwitch &sw, int beam_width = 4);

struct TrainConfig {
  LrSchedule schedule{2e-3, 200, 800, 500.0};
  DropoutPolicy dropout;
  model::ModalitySwitch modalities;
  std::optional<eval::MultistyleOptions> multistyle;
  FeatureOptions features;  // used to re-featurize augmented audio
  int64_t steps = 2000;
  int batch_size = 8;
  int64_t eval_every = 200;
  int eval_beam = 4;
  double max_grad_norm = 5.0;  // 0 disables clipping
  uint64_t seed = 1;
  AdamOptions adam;
};

struct MetricsRow {
  int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::optional<double> heldout_wer;
};

struct TrainResult {
  model::ModelWeights best_weights;
  int64_t best_step = 0;
  double best_wer = 0.0;
  std::vector<MetricsRow> metrics;
};

using ProgressFn = std::function<void(const MetricsRow &)>;
// Called after every held-out evaluation with the weights that were scored.
using EvalHook = std::function<void(const MetricsRow &, const model::TransducerModel &)>;

// Leaves the best held-out checkpoint in model.weights.
TrainResult train(model::TransducerModel &model, const std::vector<Example> &train_set,
                  const std::vector<Example> &heldout, const TrainConfig &config,
                  const ProgressFn &progress = {}, const EvalHook &on_eval = {});

}  // namespace avrnnt::train

#endif  // AVRNNT_TRAINER_H_
