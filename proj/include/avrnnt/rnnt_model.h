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

// Audio-visual RNN-T: layer-normalized bidirectional LSTM encoder over the
// concatenated [audio | video] features, projected unidirectional LSTM
// prediction network over grapheme history, and an additive tanh joint
// network producing grapheme logits for every (frame, label position).

#ifndef AVRNNT_RNNT_MODEL_H_
#define AVRNNT_RNNT_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "avrnnt/beam_search.h"
#include "avrnnt/lstm.h"
#include "avrnnt/types.h"
#include "avrnnt/video_frontend.h"

namespace avrnnt::model {

struct ModalitySwitch {
  bool audio_on = true;
  bool video_on = true;

  bool any() const { return audio_on || video_on; }
};

struct ModelConfig {
  int audio_dim = 400;
  video::VideoFrontendConfig video;
  int encoder_layers = 5;
  int encoder_units = 512;  // per direction
  int decoder_layers = 2;
  int decoder_units = 2048;
  int decoder_projection = 640;
  int joint_dim = 640;
  int vocab_size = 75;  // including blank
  int blank = 0;

  int video_dim() const { return video.embedding_dim(); }
  int input_dim() const { return audio_dim + video_dim(); }
  int encoder_output_dim() const { return 2 * encoder_units; }
  int decoder_output_dim() const {
    return decoder_projection > 0 ? decoder_projection : decoder_units;
  }

  void validate() const;
  static ModelConfig full_scale();
};

struct ModelWeights {
  std::vector<video::ConvBlockWeights> video;
  std::vector<std::array<LnLstmWeights, 2>> encoder;  // forward, backward
  std::vector<LnLstmWeights> decoder;
  Matrix joint_encoder;      // encoder_output_dim x joint_dim
  Matrix joint_decoder;      // decoder_output_dim x joint_dim
  Matrix joint_output;       // joint_dim x vocab
  Matrix joint_output_bias;  // 1 x vocab
};

using NamedTensors = std::vector<std::pair<std::string, Matrix *>>;
using ConstNamedTensors = std::vector<std::pair<std::string, const Matrix *>>;

// Every tensor in a fixed, documented order (used by checkpoints and Adam).
NamedTensors named_tensors(ModelWeights &w);
ConstNamedTensors named_tensors(const ModelWeights &w);

ModelWeights zero_weights(const ModelConfig &config);
// uniform(-0.05, 0.05) everywhere except normalization gains (1) and
// offsets (0).
ModelWeights init_weights(const ModelConfig &config, uint64_t seed);
int64_t total_size(const ModelWeights &w);

struct TransducerModel {
  ModelConfig config;
  ModelWeights weights;
};

// Zeroes the audio columns [0, audio_dim) and/or the video columns
// [audio_dim, input_dim) according to the switch.
Matrix apply_switch(const Matrix &features, const ModalitySwitch &sw, int audio_dim);

struct EncoderCache {
  std::vector<std::array<LstmSequenceCache, 2>> layers;
};

Matrix encode(const Matrix &features, const ModalitySwitch &sw, const TransducerModel &model,
              EncoderCache *cache = nullptr);
Matrix encode_backward(const Matrix &grad_out, const TransducerModel &model,
                       const EncoderCache &cache, ModelWeights &grads);

// Decoder outputs for the start symbol followed by each label: (U+1) x P.
struct DecoderCache {
  std::vector<LstmSequenceCache> layers;
};
Matrix predict(const std::vector<int> &labels, const TransducerModel &model,
               DecoderCache *cache = nullptr);
void predict_backward(const Matrix &grad_out, const TransducerModel &model,
                      const DecoderCache &cache, ModelWeights &grads);

// Unnormalized grapheme logits for one (frame, label position) pair.
RowVector joint(const RowVector &enc_t, const RowVector &dec_u, const TransducerModel &model);

// T x (U+1) x V log-posteriors for every lattice point.
Tensor3 joint_log_probs(const Matrix &enc, const Matrix &dec, const TransducerModel &model);

// One utterance as the model consumes it. Each encoder frame n is paired with
// video frame video_index[n].
struct ModelInput {
  Matrix audio;  // N x audio_dim
  std::optional<video::VideoClip> video;
  std::vector<int> video_index;
};

// Builds the N x input_dim feature matrix; the video front end only runs when
// the video switch is on.
Matrix assemble_features(const ModelInput &in, const ModalitySwitch &sw,
                         const TransducerModel &model, video::VideoCache *cache = nullptr);

struct LossResult {
  double loss = 0.0;
  int64_t frames = 0;
  int64_t labels = 0;
};

// -log P(labels | input); when grads is non-null, accumulates the exact
// gradient of that loss into it.
LossResult utterance_loss(const ModelInput &in, const std::vector<int> &labels,
                          const ModalitySwitch &sw, const TransducerModel &model,
                          ModelWeights *grads = nullptr);

// Beam-search adapter over precomputed encoder output.
class ModelScorer : public loss::TransducerScorer {
 public:
  ModelScorer(const TransducerModel &model, const Matrix &encoder_output);

  int vocab_size() const override { return model_.config.vocab_size; }
  int blank() const override { return model_.config.blank; }
  int num_frames() const override { return static_cast<int>(enc_proj_.rows()); }
  loss::DecoderHandle initial_state() const override;
  loss::DecoderHandle advance(const loss::DecoderHandle &state, int label) const override;
  Vector log_probs(int frame, const loss::DecoderHandle &state) const override;

 private:
  const TransducerModel &model_;
  Matrix enc_proj_;  // N x joint_dim
};

// Decoder output after consuming `label` (start symbol when label < 0).
struct PredictionState : loss::DecoderState {
  std::vector<LstmState> layers;
  RowVector output;      // decoder output (P)
  RowVector joint_proj;  // output * joint_decoder
};

std::vector<loss::BeamHypothesis> decode(const ModelInput &in, const ModalitySwitch &sw,
                                         const TransducerModel &model,
                                         const loss::BeamOptions &options = {});

}  // namespace avrnnt::model

#endif  // AVRNNT_RNNT_MODEL_H_
