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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. `--only <name>` runs a single criterion.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avrnnt/audio_frontend.h"
#include "avrnnt/beam_search.h"
#include "avrnnt/corruption.h"
#include "avrnnt/param_count.h"
#include "avrnnt/rnnt_model.h"
#include "avrnnt/toy_task.h"
#include "avrnnt/trainer.h"
#include "avrnnt/transducer_loss.h"
#include "test_util.h"
#include "transducer_oracles.h"

using namespace avrnnt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char *f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double db(double power_ratio) { return 10.0 * std::log10(power_ratio); }

// ---- parameter table --------------------------------------------------------

Outcome parameter_table() {
  const auto table = model::count_parameters(model::ModelConfig::full_scale());
  const auto rows = model::compare_with_published(table);
  int bad = 0;
  double worst = 0.0;
  for (const auto &r : rows) {
    bad += !r.matches || r.relative_delta >= 5e-4;
    worst = std::max(worst, r.relative_delta);
  }
  const bool total_ok = model::format_count(table.total) == "62.9M";
  return {bad == 0 && total_ok && rows.size() == 16,
          fmt("%zu rows, %d mismatched, total %s, worst delta %.4f%%", rows.size(), bad,
              model::format_count(table.total).c_str(), 100.0 * worst)};
}

// ---- transducer loss --------------------------------------------------------

Outcome loss_oracle() {
  std::mt19937_64 rng(2024);
  int cases = 0;
  double worst = 0.0;
  for (int t = 1; t <= 4; ++t) {
    for (int u = 0; u <= 3; ++u) {
      for (int v = 2; v <= 4; ++v) {
        std::uniform_int_distribution<int> sym(1, v - 1);
        for (int trial = 0; trial < 100; ++trial) {
          const Tensor3 lp = testing::random_lattice(t, u, v, rng);
          std::vector<int> y(static_cast<size_t>(u));
          for (auto &s : y) s = sym(rng);
          const double got = loss::transducer_loss(lp, y, 0).loss;
          worst = std::max(worst, std::abs(got + testing::brute_force_log_likelihood(lp, y, 0)));
          ++cases;
        }
      }
    }
  }
  return {worst < 1e-8, fmt("%d lattices, max |loss - enumeration| = %.2e", cases, worst)};
}

// ---- gradients --------------------------------------------------------------

model::TransducerModel tiny_model(uint64_t seed) {
  model::ModelConfig c;
  c.audio_dim = 3;
  c.video.input_size = 4;
  c.video.channels = {4};
  c.video.groups = 2;
  c.encoder_layers = 2;
  c.encoder_units = 3;
  c.decoder_layers = 2;
  c.decoder_units = 4;
  c.decoder_projection = 3;
  c.joint_dim = 5;
  c.vocab_size = 4;
  model::TransducerModel m{c, model::init_weights(c, seed)};
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (auto &[name, t] : model::named_tensors(m.weights)) {
    for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += u(rng);
  }
  return m;
}

video::VideoClip random_clip(int frames, int size, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  video::VideoClip clip;
  clip.pixels.height = clip.pixels.width = size;
  for (int t = 0; t < frames; ++t) {
    Matrix f(size * size, 3);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = u(rng);
    clip.pixels.frames.push_back(f);
  }
  return clip;
}

Outcome gradient_checks() {
  std::mt19937_64 rng(99);
  double worst_loss = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int t = 1 + trial % 4, u = trial % 4, v = 2 + trial % 3;
    Tensor3 lp = testing::random_lattice(t, u, v, rng, trial % 2 == 0);
    std::vector<int> y(static_cast<size_t>(u));
    for (size_t k = 0; k < y.size(); ++k) y[k] = 1 + static_cast<int>(k) % (v - 1);
    const auto r = loss::transducer_loss(lp, y, 0);
    for (size_t i = 0; i < lp.data().size(); ++i) {
      auto central = [&](double h) {
        const double keep = lp.data()[i];
        lp.data()[i] = keep + h;
        const double up = loss::transducer_loss(lp, y, 0).loss;
        lp.data()[i] = keep - h;
        const double down = loss::transducer_loss(lp, y, 0).loss;
        lp.data()[i] = keep;
        return (up - down) / (2 * h);
      };
      // Richardson extrapolation: gradients near 1e-6 drown in roundoff with
      // a single small step.
      const double fd = (4.0 * central(5e-4) - central(1e-3)) / 3.0;
      if (fd == 0.0 && r.grad.data()[i] == 0.0) continue;
      worst_loss = std::max(worst_loss, testing::rel_error(fd, r.grad.data()[i]));
    }
  }

  double worst_model = 0.0;
  for (uint64_t seed : {31u, 32u, 33u}) {
    model::TransducerModel m = tiny_model(seed);
    std::mt19937_64 r(seed);
    model::ModelInput in;
    in.audio = testing::random_matrix(4, m.config.audio_dim, r);
    in.video = random_clip(4, 4, r);
    const std::vector<int> labels = {1, 3, 2};
    model::ModelWeights grads = model::zero_weights(m.config);
    model::utterance_loss(in, labels, {}, m, &grads);
    auto params = model::named_tensors(m.weights);
    auto gparams = model::named_tensors(grads);
    const double h = 1e-6;
    for (size_t p = 0; p < params.size(); ++p) {
      Matrix &w = *params[p].second;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double keep = w.data()[i];
        w.data()[i] = keep + h;
        const double up = model::utterance_loss(in, labels, {}, m).loss;
        w.data()[i] = keep - h;
        const double down = model::utterance_loss(in, labels, {}, m).loss;
        w.data()[i] = keep;
        worst_model = std::max(worst_model, testing::rel_error((up - down) / (2 * h),
                                                                gparams[p].second->data()[i], 1e-6));
      }
    }
  }
  return {worst_loss < 1e-6 && worst_model < 1e-3,
          fmt("loss rel. error %.2e (< 1e-6), end-to-end rel. error %.2e (< 1e-3)", worst_loss,
              worst_model)};
}

// ---- synchronization --------------------------------------------------------

Outcome synchronization() {
  const Rational rates[] = {{24, 1}, {25, 1}, {30000, 1001}, {30, 1}};
  const double lengths[] = {0.5, 1.0, 2.7, 5.0, 11.3, 20.0, 30.0};
  int worst_frames = 0, clips = 0;
  double worst_drift = 0.0;
  for (const Rational &fps : rates) {
    for (double secs : lengths) {
      const auto frames = static_cast<int64_t>(std::floor(secs * fps.value()));
      const dsp::Waveform w = testing::white_noise(static_cast<size_t>(std::llround(secs * 16000.0)),
                                                   0.1, static_cast<uint64_t>(clips));
      dsp::FrontendConfig cfg;
      cfg.mode = dsp::FrameRateMode::kVariableThirdOfVideoFrame;
      cfg.video_fps = fps;
      cfg.num_video_frames = frames;
      const auto seq = dsp::featurize(w, cfg);
      worst_frames = std::max<int>(worst_frames, static_cast<int>(std::abs(seq.num_frames() - frames)));
      for (int64_t k = 0; k < seq.num_frames(); ++k) {
        // Window centre of video frame k: k / fps plus half a window.
        const double ideal = static_cast<double>(k * fps.den) / static_cast<double>(fps.num) + 200.0 / 16000.0;
        worst_drift = std::max(worst_drift, std::abs(seq.timestamps[static_cast<size_t>(k)] - ideal) * 16000.0);
      }
      ++clips;
    }
  }
  return {worst_frames <= 1 && worst_drift < 1.0,
          fmt("%d clips, max |audio - video frames| = %d, max drift %.3f samples", clips,
              worst_frames, worst_drift)};
}

// ---- SNR calibration --------------------------------------------------------

Outcome snr_calibration() {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> len(8000, 48000);
  double worst_snr = 0.0, worst_overlap = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const auto n = static_cast<size_t>(len(rng));
    const dsp::Waveform speech = testing::white_noise(n, 0.02 + 0.002 * pair, 1000 + pair);
    const dsp::Waveform noise = eval::synthetic_babble(len(rng), 2000 + pair);
    for (double target : {0.0, 10.0, 20.0}) {
      const auto m = eval::mix_at_snr(speech, noise, target);
      std::vector<double> added(n), clean(n);
      for (size_t i = 0; i < n; ++i) {
        clean[i] = speech.samples[i] * m.clip_scale;
        added[i] = m.audio.samples[i] - clean[i];
      }
      const double measured = db(std::pow(eval::rms(clean) / eval::rms(added), 2));
      worst_snr = std::max(worst_snr, std::abs(measured - target));
    }
    const dsp::Waveform other = testing::white_noise(48000, 0.3, 3000 + pair);
    for (auto pos : {eval::OverlapPosition::kBegin, eval::OverlapPosition::kEnd}) {
      const auto ov = eval::splice_overlap(speech, other, {pos, 0.25});
      const auto k = static_cast<size_t>(ov.overlap_samples);
      const size_t begin = pos == eval::OverlapPosition::kBegin ? 0 : n - k;
      std::vector<double> added(k), clean(k);
      for (size_t i = 0; i < k; ++i) {
        clean[i] = speech.samples[begin + i];
        added[i] = ov.audio.samples[begin + i] - clean[i];
      }
      worst_overlap = std::max(worst_overlap, std::abs(db(std::pow(eval::rms(clean) / eval::rms(added), 2))));
    }
  }
  return {worst_snr <= 0.1 && worst_overlap <= 0.1,
          fmt("babble max error %.2e dB over 300 mixtures, overlap energy error %.2e dB",
              worst_snr, worst_overlap)};
}

// ---- WER oracle -------------------------------------------------------------

// Minimal edit distance by breadth-first search over edit scripts: the
// smallest number of single-token edits turning ref into hyp.
int exhaustive_distance(const std::vector<int> &ref, const std::vector<int> &hyp) {
  if (ref == hyp) return 0;
  std::set<std::vector<int>> seen{ref};
  std::vector<std::vector<int>> frontier{ref};
  for (int d = 1;; ++d) {
    std::vector<std::vector<int>> next;
    for (const auto &s : frontier) {
      auto visit = [&](std::vector<int> c) {
        if (seen.insert(c).second) next.push_back(std::move(c));
      };
      for (size_t i = 0; i < s.size(); ++i) {
        auto del = s;
        del.erase(del.begin() + static_cast<std::ptrdiff_t>(i));
        visit(del);
        for (int a = 0; a < 3; ++a) {
          if (a == s[i]) continue;
          auto sub = s;
          sub[i] = a;
          visit(sub);
        }
      }
      if (s.size() < 7) {
        for (size_t i = 0; i <= s.size(); ++i) {
          for (int a = 0; a < 3; ++a) {
            auto ins = s;
            ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(i), a);
            visit(ins);
          }
        }
      }
    }
    for (const auto &c : next) {
      if (c == hyp) return d;
    }
    frontier = std::move(next);
  }
}

Outcome wer_oracle() {
  // All sequences of length <= 6 over {a, b, c}.
  std::vector<std::vector<int>> all{{}};
  for (size_t start = 0; all.back().size() < 6;) {
    const size_t end = all.size();
    for (size_t i = start; i < end; ++i) {
      for (int a = 0; a < 3; ++a) {
        auto s = all[i];
        s.push_back(a);
        all.push_back(s);
      }
    }
    start = end;
  }
  const char *names[] = {"a", "b", "c"};
  auto words = [&](const std::vector<int> &s) {
    std::vector<std::string> w;
    for (int x : s) w.emplace_back(names[x]);
    return w;
  };
  // Breadth-first search from each reference visits every hypothesis, so one
  // sweep per reference gives exact distances to the whole set.
  int64_t pairs = 0, mismatches = 0;
  for (const auto &ref : all) {
    std::map<std::vector<int>, int> dist{{ref, 0}};
    std::vector<std::vector<int>> frontier{ref};
    for (int d = 1; !frontier.empty(); ++d) {
      std::vector<std::vector<int>> next;
      for (const auto &s : frontier) {
        auto visit = [&](std::vector<int> c) {
          if (c.size() > 6 || dist.count(c)) return;
          dist[c] = d;
          next.push_back(std::move(c));
        };
        for (size_t i = 0; i < s.size(); ++i) {
          auto del = s;
          del.erase(del.begin() + static_cast<std::ptrdiff_t>(i));
          visit(del);
          for (int a = 0; a < 3; ++a) {
            if (a == s[i]) continue;
            auto sub = s;
            sub[i] = a;
            visit(sub);
          }
        }
        for (size_t i = 0; i <= s.size(); ++i) {
          for (int a = 0; a < 3; ++a) {
            auto ins = s;
            ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(i), a);
            visit(ins);
          }
        }
      }
      frontier = std::move(next);
    }
    const auto ref_words = words(ref);
    for (const auto &hyp : all) {
      const auto r = eval::word_error_rate(ref_words, words(hyp));
      mismatches += r.errors() != dist.at(hyp);
      ++pairs;
    }
  }
  // Restricting intermediate strings to length <= 6 cannot shorten a path, but
  // it could lengthen one; spot-check against the unrestricted search.
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<size_t> pick(0, all.size() - 1);
  for (int i = 0; i < 300; ++i) {
    const auto &a = all[pick(rng)];
    const auto &b = all[pick(rng)];
    mismatches += eval::word_error_rate(words(a), words(b)).errors() != exhaustive_distance(a, b);
  }

  // Bootstrap CI against the binomial closed form on Bernoulli corpora.
  double worst_ci = 0.0;
  for (double p : {0.05, 0.2, 0.5}) {
    std::mt19937_64 r(static_cast<uint64_t>(p * 1000));
    std::bernoulli_distribution err(p);
    const int n = 4000;
    std::vector<int64_t> errors(n), ref(n, 1);
    for (auto &e : errors) e = err(r);
    const double closed = 1.96 * std::sqrt(p * (1 - p) / n) * 100.0;
    const double boot = eval::confidence_interval_95(errors, ref, {eval::CiMethod::kBootstrap, 2000, 17});
    worst_ci = std::max(worst_ci, std::abs(boot / closed - 1.0));
  }
  return {mismatches == 0 && worst_ci < 0.2,
          fmt("%lld pairs, %lld mismatches; bootstrap vs binomial worst relative gap %.3f",
              static_cast<long long>(pairs), static_cast<long long>(mismatches), worst_ci)};
}

// ---- beam search ------------------------------------------------------------

Outcome beam_decode_check() {
  int below = 0, runs = 0, exhaustive_misses = 0;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    testing::TableScorer s(6, 4, 7000 + seed, 1.0);
    below += loss::beam_decode(s, {4, 3})[0].log_score < loss::beam_decode(s, {1, 3})[0].log_score;
    ++runs;
  }
  for (uint64_t seed = 0; seed < 60; ++seed) {
    model::TransducerModel m = tiny_model(500 + seed);
    std::mt19937_64 rng(seed);
    model::ModelInput in;
    in.audio = testing::random_matrix(5, m.config.audio_dim, rng);
    in.video = random_clip(5, 4, rng);
    below += model::decode(in, {}, m, {4, 4})[0].log_score < model::decode(in, {}, m, {1, 4})[0].log_score;
    ++runs;
  }
  // Three frames, one symbol per frame: beam 4 must find the exhaustive best.
  for (uint64_t seed = 0; seed < 200; ++seed) {
    testing::TableScorer s(3, 3, 9000 + seed);
    const auto exact = testing::exhaustive_scores(s, 1);
    auto best = exact.begin();
    for (auto it = exact.begin(); it != exact.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    exhaustive_misses += loss::beam_decode(s, {4, 1})[0].labels != best->first;
  }
  return {below == 0 && exhaustive_misses == 0,
          fmt("beam 4 below greedy in %d of %d searches; %d of 200 three-frame models disagree "
              "with exhaustive search",
              below, runs, exhaustive_misses)};
}

// ---- toy task ---------------------------------------------------------------

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct ToySets {
  std::vector<train::Example> train, heldout, test;
};

constexpr int kToyTrain = 1000, kToyHeldout = 100, kToyTest = 300;
constexpr double kToyOverlapSeconds = 0.25;

std::vector<toy::ToyUtterance> toy_corpus() {
  toy::ToyTaskSpec spec;
  spec.num_utterances = kToyTrain + kToyHeldout + kToyTest;
  spec.seed = 1;
  return toy::generate_corpus(spec);
}

train::FeatureOptions toy_features(dsp::FrameRateMode mode) {
  return {mode, 20, true};
}

ToySets toy_sets(const std::vector<toy::ToyUtterance> &corpus, const train::FeatureOptions &fo) {
  ToySets s;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto &u = corpus[i];
    train::Example ex{u.id, u.labels, train::prepare_input(u.audio, u.video, fo), u.audio};
    (i < kToyTrain ? s.train : i < kToyTrain + kToyHeldout ? s.heldout : s.test).push_back(std::move(ex));
  }
  return s;
}

model::ModelConfig toy_model_config() {
  model::ModelConfig c;
  c.audio_dim = 100;
  c.video.input_size = 16;
  c.video.channels = {8, 16};
  c.video.groups = 4;
  c.encoder_layers = 2;
  c.encoder_units = 24;
  c.decoder_layers = 1;
  c.decoder_units = 32;
  c.decoder_projection = 0;
  c.joint_dim = 32;
  c.vocab_size = 6;
  return c;
}

model::TransducerModel train_toy(const char *name, const ToySets &sets, train::TrainConfig tc) {
  const auto t0 = Clock::now();
  model::TransducerModel m{toy_model_config(), model::init_weights(toy_model_config(), 3)};
  tc.steps = 2000;
  tc.eval_every = 200;
  const auto r = train::train(m, sets.train, sets.heldout, tc);
  std::fprintf(stderr, "  trained %-10s best step %5lld held-out WER %6.2f  (%.0f s)\n", name,
               static_cast<long long>(r.best_step), r.best_wer, seconds_since(t0));
  return m;
}

std::vector<train::Example> corrupt_babble(const std::vector<toy::ToyUtterance> &corpus,
                                           const train::FeatureOptions &fo) {
  std::vector<train::Example> out;
  for (size_t i = kToyTrain + kToyHeldout; i < corpus.size(); ++i) {
    const auto &u = corpus[i];
    const dsp::Waveform noise = eval::synthetic_babble(static_cast<int64_t>(u.audio.samples.size()), 500 + i);
    const dsp::Waveform mixed = eval::mix_at_snr(u.audio, noise, 0.0).audio;
    out.push_back({u.id, u.labels, train::prepare_input(mixed, u.video, fo), mixed});
  }
  return out;
}

std::vector<train::Example> corrupt_overlap(const std::vector<toy::ToyUtterance> &corpus,
                                            const train::FeatureOptions &fo) {
  std::vector<train::Example> out;
  const size_t first = kToyTrain + kToyHeldout;
  const size_t n = corpus.size() - first;
  for (size_t k = 0; k < n; ++k) {
    const auto &u = corpus[first + k];
    const auto &other = corpus[first + (k + 1) % n];
    const dsp::Waveform mixed =
        eval::splice_overlap(u.audio, other.audio, {eval::OverlapPosition::kBegin, kToyOverlapSeconds}).audio;
    out.push_back({u.id, u.labels, train::prepare_input(mixed, u.video, fo), mixed});
  }
  return out;
}

struct Wer {
  double wer = 0.0, ci = 0.0;
};

Wer score(const model::TransducerModel &m, const std::vector<train::Example> &set,
          const model::ModalitySwitch &sw) {
  const auto r = train::evaluate(m, set, sw, 4).report;
  return {r.wer, r.ci_halfwidth_95.value_or(0.0)};
}

struct ToyResults {
  Wer a, v, av, av_video_only, avdrop_video_only;
  Wer a_babble, av_babble, avdrop, avdrop_babble;
  Wer a_overlap, av_overlap, a_ms_overlap, av_ms_overlap;
  Wer av_fixed;
  double seconds = 0.0;
};

const ToyResults &toy_results() {
  static const ToyResults results = [] {
    const auto t0 = Clock::now();
    const model::ModalitySwitch kA{true, false}, kV{false, true}, kAV{true, true};
    const auto corpus = toy_corpus();
    const auto fo = toy_features(dsp::FrameRateMode::kVariableThirdOfVideoFrame);
    const ToySets sets = toy_sets(corpus, fo);
    const auto babble = corrupt_babble(corpus, fo);
    const auto overlap = corrupt_overlap(corpus, fo);

    train::TrainConfig base;
    base.features = fo;
    ToyResults r;

    train::TrainConfig tc = base;
    tc.modalities = kA;
    const auto a = train_toy("A", sets, tc);
    r.a = score(a, sets.test, kA);
    r.a_babble = score(a, babble, kA);
    r.a_overlap = score(a, overlap, kA);

    tc.modalities = kV;
    const auto v = train_toy("V", sets, tc);
    r.v = score(v, sets.test, kV);

    tc.modalities = kAV;
    const auto av = train_toy("A+V", sets, tc);
    r.av = score(av, sets.test, kAV);
    r.av_video_only = score(av, sets.test, kV);
    r.av_babble = score(av, babble, kAV);
    r.av_overlap = score(av, overlap, kAV);

    tc.dropout = {0.3, 0.0};
    const auto avdrop = train_toy("A+V drop", sets, tc);
    r.avdrop = score(avdrop, sets.test, kAV);
    r.avdrop_video_only = score(avdrop, sets.test, kV);
    r.avdrop_babble = score(avdrop, babble, kAV);

    tc = base;
    tc.multistyle = eval::MultistyleOptions{0.1, 0.0, 20.0};
    tc.modalities = kA;
    r.a_ms_overlap = score(train_toy("A ms", sets, tc), overlap, kA);
    tc.modalities = kAV;
    r.av_ms_overlap = score(train_toy("A+V ms", sets, tc), overlap, kAV);

    tc = base;
    tc.features = toy_features(dsp::FrameRateMode::kFixed10msDecimate3);
    tc.modalities = kAV;
    const ToySets fixed = toy_sets(corpus, tc.features);
    r.av_fixed = score(train_toy("A+V fixed", fixed, tc), fixed.test, kAV);

    r.seconds = seconds_since(t0);
    auto row = [](const char *name, Wer w) {
      std::fprintf(stderr, "  %-34s %6.2f +- %5.2f\n", name, w.wer, w.ci);
    };
    std::fprintf(stderr, "  toy WER (%%, 95%% CI half-width) on %d test utterances\n", kToyTest);
    row("A / clean", r.a);
    row("V / clean", r.v);
    row("A+V / clean", r.av);
    row("A+V / clean, video only", r.av_video_only);
    row("A+V drop / clean", r.avdrop);
    row("A+V drop / clean, video only", r.avdrop_video_only);
    row("A / babble 0 dB", r.a_babble);
    row("A+V / babble 0 dB", r.av_babble);
    row("A+V drop / babble 0 dB", r.avdrop_babble);
    row("A / overlap", r.a_overlap);
    row("A multistyle / overlap", r.a_ms_overlap);
    row("A+V / overlap", r.av_overlap);
    row("A+V multistyle / overlap", r.av_ms_overlap);
    row("A+V fixed rate / clean", r.av_fixed);
    return r;
  }();
  return results;
}

Outcome toy_directional() {
  const ToyResults &r = toy_results();
  // Non-degenerate: well below the 100% of an empty or all-blank output.
  const bool a_ok = r.a.wer < 50 && r.v.wer < 50 && r.av.wer < 50 && r.av.wer <= r.a.wer;
  const bool b_ok = r.av_video_only.wer >= 50 && r.avdrop_video_only.wer <= r.v.wer + 10;
  const double deg_a = r.a_babble.wer - r.a.wer, deg_av = r.av_babble.wer - r.av.wer;
  const bool c_ok = deg_av < deg_a;
  const bool d_ok = r.a_ms_overlap.wer < r.a_overlap.wer && r.av_ms_overlap.wer < r.av_overlap.wer;
  const bool time_ok = r.seconds < 3600;
  return {a_ok && b_ok && c_ok && d_ok && time_ok,
          fmt("(a) %s A %.1f V %.1f A+V %.1f; (b) %s A+V video-only %.1f, dropout video-only %.1f "
              "vs V %.1f; (c) %s babble degradation A+V %+.1f vs A %+.1f (dropout-trained A+V %+.1f, "
              "informational); (d) %s overlap A %.1f->%.1f "
              "A+V %.1f->%.1f; %.0f s",
              a_ok ? "ok" : "FAIL", r.a.wer, r.v.wer, r.av.wer, b_ok ? "ok" : "FAIL",
              r.av_video_only.wer, r.avdrop_video_only.wer, r.v.wer, c_ok ? "ok" : "FAIL", deg_av,
              deg_a, r.avdrop_babble.wer - r.avdrop.wer, d_ok ? "ok" : "FAIL", r.a_overlap.wer, r.a_ms_overlap.wer, r.av_overlap.wer,
              r.av_ms_overlap.wer, r.seconds)};
}

Outcome frame_rate_parity() {
  const ToyResults &r = toy_results();
  const double gap = std::abs(r.av.wer - r.av_fixed.wer);
  return {gap <= std::max(r.av.ci, r.av_fixed.ci),
          fmt("variable %.2f +- %.2f, fixed %.2f +- %.2f, gap %.2f", r.av.wer, r.av.ci,
              r.av_fixed.wer, r.av_fixed.ci, gap)};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"acceptance suite"};
  std::vector<std::string> only;
  app.add_option("--only", only, "Run only the named criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"parameter-table", parameter_table},
      {"transducer-loss-oracle", loss_oracle},
      {"gradient-checks", gradient_checks},
      {"synchronization", synchronization},
      {"snr-calibration", snr_calibration},
      {"wer-oracle", wer_oracle},
      {"beam-decode", beam_decode_check},
      {"toy-directional", toy_directional},
      {"frame-rate-parity", frame_rate_parity},
  };
  int failed = 0;
  for (const auto &[name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
