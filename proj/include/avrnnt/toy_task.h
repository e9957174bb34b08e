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

// Synthetic audio-visual corpus for desk-scale experiments. Each symbol is a
// tone in the audio and a moving shape in the video; the confusion groups
// decide which symbols only one modality can tell apart.

#ifndef AVRNNT_TOY_TASK_H_
#define AVRNNT_TOY_TASK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "avrnnt/audio_frontend.h"
#include "avrnnt/types.h"
#include "avrnnt/video_frontend.h"

namespace avrnnt::toy {

enum class Pattern { kBarDown, kBarRight, kGrowingSquare, kDiagonalDot, kRing, kBarUp };

struct ToyTaskSpec {
  int vocab = 5;  // symbols 1..vocab; 0 is blank
  int num_utterances = 200;
  int min_symbols = 2;
  int max_symbols = 4;
  int min_symbol_frames = 3;
  int max_symbol_frames = 5;
  int thumbnail_size = 16;
  std::vector<Rational> fps_choices{{24, 1}, {25, 1}, {30000, 1001}, {30, 1}};
  // Tone per symbol (index s - 1). Equal tones make symbols audio-ambiguous.
  std::vector<double> tone_hz{400.0, 700.0, 1000.0, 1500.0, 1500.0};
  // Pattern per symbol. Equal patterns make symbols video-ambiguous.
  std::vector<Pattern> patterns{Pattern::kBarDown, Pattern::kBarDown, Pattern::kBarRight,
                                Pattern::kGrowingSquare, Pattern::kDiagonalDot};
  double tone_amplitude = 0.3;
  double audio_noise_rms = 0.003;
  double pixel_noise = 0.05;
  uint64_t seed = 1;

  void validate() const;
};

struct ToyUtterance {
  std::string id;
  std::vector<int> labels;
  std::string text;  // one word per symbol
  dsp::Waveform audio;
  video::VideoClip video;
};

std::vector<ToyUtterance> generate_corpus(const ToyTaskSpec &spec);

// Word for a symbol ("s1", "s2", ...) and back.
std::string symbol_word(int symbol);
int word_symbol(const std::string &word);

}  // namespace avrnnt::toy

#endif  // AVRNNT_TOY_TASK_H_
