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

#include "avrnnt/toy_task.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "avrnnt/error.h"

namespace avrnnt::toy {

void ToyTaskSpec::validate() const {
  if (vocab < 1 || static_cast<int>(tone_hz.size()) < vocab ||
      static_cast<int>(patterns.size()) < vocab) {
    throw Error(ErrorCode::kConfigError, "toy task needs a tone and a pattern per symbol");
  }
  if (min_symbols < 1 || max_symbols < min_symbols || min_symbol_frames < 1 ||
      max_symbol_frames < min_symbol_frames || thumbnail_size < 4 || fps_choices.empty() ||
      num_utterances < 0) {
    throw Error(ErrorCode::kConfigError, "invalid toy task ranges");
  }
}

std::string symbol_word(int symbol) { return "s" + std::to_string(symbol); }

int word_symbol(const std::string &word) {
  if (word.size() < 2 || word[0] != 's') throw Error(ErrorCode::kFormatError, "not a symbol: " + word);
  return std::stoi(word.substr(1));
}

namespace {

// Intensity of the pattern at pixel (x, y) in [0, 1]^2 for progress p in [0, 1].
double pattern_value(Pattern pattern, double x, double y, double p) {
  switch (pattern) {
    case Pattern::kBarDown:
      return std::abs(y - (0.15 + 0.7 * p)) < 0.12 ? 1.0 : 0.0;
    case Pattern::kBarUp:
      return std::abs(y - (0.85 - 0.7 * p)) < 0.12 ? 1.0 : 0.0;
    case Pattern::kBarRight:
      return std::abs(x - (0.15 + 0.7 * p)) < 0.12 ? 1.0 : 0.0;
    case Pattern::kGrowingSquare: {
      const double half = 0.1 + 0.3 * p;
      return std::max(std::abs(x - 0.5), std::abs(y - 0.5)) < half ? 1.0 : 0.0;
    }
    case Pattern::kDiagonalDot: {
      const double c = 0.2 + 0.6 * p;
      return std::hypot(x - c, y - c) < 0.18 ? 1.0 : 0.0;
    }
    case Pattern::kRing: {
      const double r = std::hypot(x - 0.5, y - 0.5);
      return std::abs(r - (0.1 + 0.3 * p)) < 0.08 ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

}  // namespace

std::vector<ToyUtterance> generate_corpus(const ToyTaskSpec &spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> n_symbols(spec.min_symbols, spec.max_symbols);
  std::uniform_int_distribution<int> symbol(1, spec.vocab);
  std::uniform_int_distribution<int> span(spec.min_symbol_frames, spec.max_symbol_frames);
  std::uniform_int_distribution<int> gap(1, 2);
  std::uniform_int_distribution<size_t> fps_pick(0, spec.fps_choices.size() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pi = std::numbers::pi;
  const int size = spec.thumbnail_size;

  std::vector<ToyUtterance> corpus;
  for (int u = 0; u < spec.num_utterances; ++u) {
    ToyUtterance utt;
    char id[32];
    std::snprintf(id, sizeof(id), "toy%05d", u);
    utt.id = id;
    const Rational fps = spec.fps_choices[fps_pick(rng)];

    // Frame-level layout: lead gap, then symbol spans separated by gaps.
    struct Segment {
      int symbol, first, count;
    };
    std::vector<Segment> segments;
    int frame = gap(rng);
    const int count = n_symbols(rng);
    for (int k = 0; k < count; ++k) {
      const Segment s{symbol(rng), frame, span(rng)};
      segments.push_back(s);
      utt.labels.push_back(s.symbol);
      frame += s.count + gap(rng);
    }
    const int total_frames = frame;
    for (size_t k = 0; k < utt.labels.size(); ++k) {
      utt.text += (k ? " " : "") + symbol_word(utt.labels[k]);
    }

    const auto samples =
        static_cast<size_t>(std::llround(total_frames * dsp::kSampleRate / fps.value()));
    utt.audio.samples.resize(samples);
    for (double &v : utt.audio.samples) v = spec.audio_noise_rms * normal(rng);
    for (const Segment &s : segments) {
      const auto begin = static_cast<size_t>(std::llround(s.first * dsp::kSampleRate / fps.value()));
      const auto end = std::min(
          samples, static_cast<size_t>(std::llround((s.first + s.count) * dsp::kSampleRate / fps.value())));
      const double f = spec.tone_hz[static_cast<size_t>(s.symbol - 1)];
      const double phase = 2.0 * pi * unit(rng);
      for (size_t i = begin; i < end; ++i) {
        const double t = static_cast<double>(i - begin) / dsp::kSampleRate;
        const double env = std::sin(pi * static_cast<double>(i - begin) / static_cast<double>(end - begin));
        utt.audio.samples[i] += spec.tone_amplitude * env *
                                (std::sin(2.0 * pi * f * t + phase) + 0.5 * std::sin(4.0 * pi * f * t));
      }
    }

    utt.video.fps = fps;
    utt.video.pixels.height = utt.video.pixels.width = size;
    std::vector<int> owner(static_cast<size_t>(total_frames), -1);
    for (size_t k = 0; k < segments.size(); ++k) {
      for (int t = 0; t < segments[k].count; ++t) owner[static_cast<size_t>(segments[k].first + t)] = static_cast<int>(k);
    }
    for (int t = 0; t < total_frames; ++t) {
      Matrix img(size * size, 3);
      const int k = owner[static_cast<size_t>(t)];
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          double v = 0.2;
          if (k >= 0) {
            const Segment &s = segments[static_cast<size_t>(k)];
            const double p = s.count > 1 ? static_cast<double>(t - s.first) / (s.count - 1) : 0.5;
            v += 0.6 * pattern_value(spec.patterns[static_cast<size_t>(s.symbol - 1)],
                                     (x + 0.5) / size, (y + 0.5) / size, p);
          }
          for (int c = 0; c < 3; ++c) {
            img(y * size + x, c) = std::clamp(v + spec.pixel_noise * normal(rng), 0.0, 1.0);
          }
        }
      }
      utt.video.pixels.frames.push_back(std::move(img));
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

}  // namespace avrnnt::toy
