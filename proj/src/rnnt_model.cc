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

#include "avrnnt/rnnt_model.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "avrnnt/error.h"
#include "avrnnt/transducer_loss.h"

namespace avrnnt::model {

void ModelConfig::validate() const {
  video.validate();
  if (audio_dim < 0 || encoder_layers < 1 || encoder_units < 1 || decoder_layers < 1 ||
      decoder_units < 1 || decoder_projection < 0 || joint_dim < 1 || vocab_size < 2) {
    throw Error(ErrorCode::kConfigError, "model dimensions must be positive");
  }
  if (blank < 0 || blank >= vocab_size) {
    throw Error(ErrorCode::kConfigError, "blank index outside the vocabulary");
  }
}

ModelConfig ModelConfig::full_scale() { return ModelConfig{}; }

NamedTensors named_tensors(ModelWeights &w) {
  NamedTensors out;
  for (size_t b = 0; b < w.video.size(); ++b) {
    const std::string p = "video/block" + std::to_string(b) + "/";
    out.emplace_back(p + "kernel", &w.video[b].kernel);
    out.emplace_back(p + "bias", &w.video[b].bias);
    out.emplace_back(p + "gn_gamma", &w.video[b].gn_gamma);
    out.emplace_back(p + "gn_beta", &w.video[b].gn_beta);
  }
  auto add_lstm = [&out](const std::string &p, LnLstmWeights &l) {
    out.emplace_back(p + "kernel", &l.kernel);
    out.emplace_back(p + "bias", &l.bias);
    out.emplace_back(p + "ln_gamma", &l.ln_gamma);
    out.emplace_back(p + "ln_beta", &l.ln_beta);
    if (l.projection.size()) out.emplace_back(p + "projection", &l.projection);
  };
  for (size_t l = 0; l < w.encoder.size(); ++l) {
    add_lstm("encoder/rnn" + std::to_string(l) + "/fw/", w.encoder[l][0]);
    add_lstm("encoder/rnn" + std::to_string(l) + "/bw/", w.encoder[l][1]);
  }
  for (size_t l = 0; l < w.decoder.size(); ++l) {
    add_lstm("decoder/rnn" + std::to_string(l) + "/", w.decoder[l]);
  }
  out.emplace_back("rnnt/encoder", &w.joint_encoder);
  out.emplace_back("rnnt/decoder", &w.joint_decoder);
  out.emplace_back("rnnt/output", &w.joint_output);
  out.emplace_back("rnnt/output_bias", &w.joint_output_bias);
  return out;
}

ConstNamedTensors named_tensors(const ModelWeights &w) {
  ConstNamedTensors out;
  for (auto &[name, m] : named_tensors(const_cast<ModelWeights &>(w))) out.emplace_back(name, m);
  return out;
}

ModelWeights zero_weights(const ModelConfig &config) {
  config.validate();
  ModelWeights w;
  for (const auto &spec : config.video.blocks()) {
    w.video.push_back({Matrix::Zero(video::kKernelTaps * spec.in_channels, spec.out_channels),
                       Matrix::Zero(1, spec.out_channels), Matrix::Zero(1, spec.out_channels),
                       Matrix::Zero(1, spec.out_channels)});
  }
  int in = config.input_dim();
  for (int l = 0; l < config.encoder_layers; ++l) {
    w.encoder.push_back({zero_lstm_weights(in, config.encoder_units),
                         zero_lstm_weights(in, config.encoder_units)});
    in = config.encoder_output_dim();
  }
  in = config.vocab_size;
  for (int l = 0; l < config.decoder_layers; ++l) {
    w.decoder.push_back(
        zero_lstm_weights(in, config.decoder_units, config.decoder_projection));
    in = config.decoder_output_dim();
  }
  w.joint_encoder = Matrix::Zero(config.encoder_output_dim(), config.joint_dim);
  w.joint_decoder = Matrix::Zero(config.decoder_output_dim(), config.joint_dim);
  w.joint_output = Matrix::Zero(config.joint_dim, config.vocab_size);
  w.joint_output_bias = Matrix::Zero(1, config.vocab_size);
  return w;
}

ModelWeights init_weights(const ModelConfig &config, uint64_t seed) {
  ModelWeights w = zero_weights(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.05, 0.05);
  for (auto &[name, m] : named_tensors(w)) {
    if (name.ends_with("gamma")) {
      m->setOnes();
    } else if (name.ends_with("beta")) {
      m->setZero();
    } else {
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = uniform(rng);
    }
  }
  return w;
}

int64_t total_size(const ModelWeights &w) {
  int64_t n = 0;
  for (const auto &[name, m] : named_tensors(w)) n += m->size();
  return n;
}

Matrix apply_switch(const Matrix &features, const ModalitySwitch &sw, int audio_dim) {
  Matrix out = features;
  if (!sw.audio_on) out.leftCols(audio_dim).setZero();
  if (!sw.video_on) out.rightCols(out.cols() - audio_dim).setZero();
  return out;
}

Matrix encode(const Matrix &features, const ModalitySwitch &sw, const TransducerModel &model,
              EncoderCache *cache) {
  if (!sw.any()) throw Error(ErrorCode::kInvalidSwitchState, "both modalities switched off");
  const ModelConfig &cfg = model.config;
  if (features.cols() != cfg.input_dim()) {
    throw Error(ErrorCode::kShapeError, "encoder expects " + std::to_string(cfg.input_dim()) +
                                            " features, got " + std::to_string(features.cols()));
  }
  Matrix x = apply_switch(features, sw, cfg.audio_dim);
  if (cache) cache->layers.assign(model.weights.encoder.size(), {});
  for (size_t l = 0; l < model.weights.encoder.size(); ++l) {
    const auto &layer = model.weights.encoder[l];
    Matrix fw = lnlstm_sequence(x, layer[0], false, cache ? &cache->layers[l][0] : nullptr);
    Matrix bw = lnlstm_sequence(x, layer[1], true, cache ? &cache->layers[l][1] : nullptr);
    x.resize(fw.rows(), fw.cols() + bw.cols());
    x << fw, bw;
  }
  return x;
}

Matrix encode_backward(const Matrix &grad_out, const TransducerModel &model,
                       const EncoderCache &cache, ModelWeights &grads) {
  const int units = model.config.encoder_units;
  Matrix g = grad_out;
  for (size_t l = model.weights.encoder.size(); l-- > 0;) {
    const auto &layer = model.weights.encoder[l];
    Matrix dx = lnlstm_sequence_backward(g.leftCols(units), layer[0], cache.layers[l][0],
                                         grads.encoder[l][0]);
    dx += lnlstm_sequence_backward(g.rightCols(units), layer[1], cache.layers[l][1],
                                   grads.encoder[l][1]);
    g = std::move(dx);
  }
  return g;
}

namespace {

void check_labels(const std::vector<int> &labels, const ModelConfig &cfg) {
  for (int y : labels) {
    if (y < 0 || y >= cfg.vocab_size || y == cfg.blank) {
      throw Error(ErrorCode::kInvalidLabel, "label " + std::to_string(y) + " not a grapheme");
    }
  }
}

}  // namespace

Matrix predict(const std::vector<int> &labels, const TransducerModel &model,
               DecoderCache *cache) {
  const ModelConfig &cfg = model.config;
  check_labels(labels, cfg);
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(labels.size()) + 1, cfg.vocab_size);
  for (size_t u = 0; u < labels.size(); ++u) x(static_cast<Eigen::Index>(u) + 1, labels[u]) = 1.0;
  if (cache) cache->layers.assign(model.weights.decoder.size(), {});
  for (size_t l = 0; l < model.weights.decoder.size(); ++l) {
    x = lnlstm_sequence(x, model.weights.decoder[l], false, cache ? &cache->layers[l] : nullptr,
                        /*rowwise=*/true);
  }
  return x;
}

void predict_backward(const Matrix &grad_out, const TransducerModel &model,
                      const DecoderCache &cache, ModelWeights &grads) {
  Matrix g = grad_out;
  for (size_t l = model.weights.decoder.size(); l-- > 0;) {
    g = lnlstm_sequence_backward(g, model.weights.decoder[l], cache.layers[l], grads.decoder[l]);
  }
}

RowVector joint(const RowVector &enc_t, const RowVector &dec_u, const TransducerModel &model) {
  const ModelWeights &w = model.weights;
  if (enc_t.size() != w.joint_encoder.rows() || dec_u.size() != w.joint_decoder.rows()) {
    throw Error(ErrorCode::kShapeError, "joint inputs do not match projection shapes");
  }
  RowVector hidden = (enc_t * w.joint_encoder + dec_u * w.joint_decoder).array().tanh();
  return hidden * w.joint_output + w.joint_output_bias.row(0);
}

namespace {

// Hidden activations and log-posteriors for every lattice point, rows ordered
// t * (U+1) + u.
struct JointForward {
  Matrix hidden;     // T(U+1) x J
  Matrix log_probs;  // T(U+1) x V
};

JointForward joint_forward(const Matrix &enc, const Matrix &dec, const ModelWeights &w) {
  const Eigen::Index frames = enc.rows(), positions = dec.rows();
  const Matrix e = enc * w.joint_encoder;
  const Matrix d = dec * w.joint_decoder;
  JointForward out;
  out.hidden.resize(frames * positions, e.cols());
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index u = 0; u < positions; ++u) {
      out.hidden.row(t * positions + u) = (e.row(t) + d.row(u)).array().tanh();
    }
  }
  out.log_probs = out.hidden * w.joint_output;
  out.log_probs.rowwise() += w.joint_output_bias.row(0);
  for (Eigen::Index r = 0; r < out.log_probs.rows(); ++r) {
    const double max = out.log_probs.row(r).maxCoeff();
    const double lse = max + std::log((out.log_probs.row(r).array() - max).exp().sum());
    out.log_probs.row(r).array() -= lse;
  }
  return out;
}

Tensor3 to_lattice(const Matrix &log_probs, Eigen::Index frames, Eigen::Index positions) {
  Tensor3 lat(frames, positions, log_probs.cols());
  std::copy(log_probs.data(), log_probs.data() + log_probs.size(), lat.data().begin());
  return lat;
}

}  // namespace

Tensor3 joint_log_probs(const Matrix &enc, const Matrix &dec, const TransducerModel &model) {
  JointForward jf = joint_forward(enc, dec, model.weights);
  return to_lattice(jf.log_probs, enc.rows(), dec.rows());
}

Matrix assemble_features(const ModelInput &in, const ModalitySwitch &sw,
                         const TransducerModel &model, video::VideoCache *cache) {
  const ModelConfig &cfg = model.config;
  if (in.audio.cols() != cfg.audio_dim) {
    throw Error(ErrorCode::kShapeError, "audio features have width " +
                                            std::to_string(in.audio.cols()) + ", expected " +
                                            std::to_string(cfg.audio_dim));
  }
  const Eigen::Index n = in.audio.rows();
  Matrix features = Matrix::Zero(n, cfg.input_dim());
  if (sw.audio_on) features.leftCols(cfg.audio_dim) = in.audio;
  if (sw.video_on && n > 0) {
    if (!in.video) throw Error(ErrorCode::kShapeError, "video switch on but no video clip");
    const auto emb =
        video::embed_clip(*in.video, cfg.video, model.weights.video, cache).embeddings;
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index idx = in.video_index.empty()
                                   ? std::min<Eigen::Index>(r, emb.rows() - 1)
                                   : in.video_index[r];
      if (idx < 0 || idx >= emb.rows()) {
        throw Error(ErrorCode::kShapeError, "video index out of range");
      }
      features.block(r, cfg.audio_dim, 1, cfg.video_dim()) = emb.row(idx);
    }
  }
  return features;
}

LossResult utterance_loss(const ModelInput &in, const std::vector<int> &labels,
                          const ModalitySwitch &sw, const TransducerModel &model,
                          ModelWeights *grads) {
  const ModelConfig &cfg = model.config;
  video::VideoCache vcache;
  const bool video_active = sw.video_on && in.audio.rows() > 0;
  Matrix features = assemble_features(in, sw, model, grads && video_active ? &vcache : nullptr);
  EncoderCache ecache;
  DecoderCache dcache;
  const Matrix enc = encode(features, sw, model, grads ? &ecache : nullptr);
  const Matrix dec = predict(labels, model, grads ? &dcache : nullptr);
  JointForward jf = joint_forward(enc, dec, model.weights);
  const Eigen::Index frames = enc.rows(), positions = dec.rows();
  const Tensor3 lattice = to_lattice(jf.log_probs, frames, positions);
  loss::TransducerLoss tl = loss::transducer_loss(lattice, labels, cfg.blank);

  LossResult result{tl.loss, frames, static_cast<int64_t>(labels.size())};
  if (!grads) return result;

  const ModelWeights &w = model.weights;
  Matrix dlogits(frames * positions, cfg.vocab_size);
  for (Eigen::Index r = 0; r < dlogits.rows(); ++r) {
    Eigen::Map<const RowVector> dlp(tl.grad.data().data() + r * cfg.vocab_size, cfg.vocab_size);
    const double total = dlp.sum();
    dlogits.row(r) = dlp - total * jf.log_probs.row(r).array().exp().matrix();
  }
  grads->joint_output.noalias() += jf.hidden.transpose() * dlogits;
  grads->joint_output_bias.row(0) += dlogits.colwise().sum();
  Matrix dhidden = dlogits * w.joint_output.transpose();
  dhidden.array() *= 1.0 - jf.hidden.array().square();

  Matrix de = Matrix::Zero(frames, cfg.joint_dim);
  Matrix dd = Matrix::Zero(positions, cfg.joint_dim);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index u = 0; u < positions; ++u) {
      de.row(t) += dhidden.row(t * positions + u);
      dd.row(u) += dhidden.row(t * positions + u);
    }
  }
  grads->joint_encoder.noalias() += enc.transpose() * de;
  grads->joint_decoder.noalias() += dec.transpose() * dd;
  predict_backward(dd * w.joint_decoder.transpose(), model, dcache, *grads);
  Matrix dfeatures = encode_backward(de * w.joint_encoder.transpose(), model, ecache, *grads);

  if (video_active) {
    const Eigen::Index video_frames = in.video->pixels.num_frames();
    Matrix demb = Matrix::Zero(video_frames, cfg.video_dim());
    for (Eigen::Index r = 0; r < frames; ++r) {
      const Eigen::Index idx = in.video_index.empty()
                                   ? std::min<Eigen::Index>(r, video_frames - 1)
                                   : in.video_index[r];
      demb.row(idx) += dfeatures.block(r, cfg.audio_dim, 1, cfg.video_dim());
    }
    video::embed_clip_backward(demb, cfg.video, w.video, vcache, grads->video);
  }
  return result;
}

ModelScorer::ModelScorer(const TransducerModel &model, const Matrix &encoder_output)
    : model_(model), enc_proj_(encoder_output * model.weights.joint_encoder) {}

loss::DecoderHandle ModelScorer::initial_state() const {
  auto st = std::make_shared<PredictionState>();
  RowVector x = RowVector::Zero(model_.config.vocab_size);
  for (const auto &layer : model_.weights.decoder) {
    st->layers.push_back(lnlstm_step(x, zero_state(layer), layer));
    x = st->layers.back().h;
  }
  st->output = x;
  st->joint_proj = x * model_.weights.joint_decoder;
  return st;
}

loss::DecoderHandle ModelScorer::advance(const loss::DecoderHandle &state, int label) const {
  const auto &prev = static_cast<const PredictionState &>(*state);
  auto st = std::make_shared<PredictionState>();
  RowVector x = RowVector::Zero(model_.config.vocab_size);
  x(label) = 1.0;
  for (size_t l = 0; l < model_.weights.decoder.size(); ++l) {
    st->layers.push_back(lnlstm_step(x, prev.layers[l], model_.weights.decoder[l]));
    x = st->layers.back().h;
  }
  st->output = x;
  st->joint_proj = x * model_.weights.joint_decoder;
  return st;
}

Vector ModelScorer::log_probs(int frame, const loss::DecoderHandle &state) const {
  const auto &st = static_cast<const PredictionState &>(*state);
  RowVector hidden = (enc_proj_.row(frame) + st.joint_proj).array().tanh();
  RowVector logits = hidden * model_.weights.joint_output + model_.weights.joint_output_bias.row(0);
  return loss::log_softmax(logits.transpose());
}

std::vector<loss::BeamHypothesis> decode(const ModelInput &in, const ModalitySwitch &sw,
                                         const TransducerModel &model,
                                         const loss::BeamOptions &options) {
  const Matrix features = assemble_features(in, sw, model);
  const Matrix enc = encode(features, sw, model);
  if (enc.rows() == 0) throw Error(ErrorCode::kEmptyInput, "no encoder frames to decode");
  ModelScorer scorer(model, enc);
  return loss::beam_decode(scorer, options);
}

}  // namespace avrnnt::model
