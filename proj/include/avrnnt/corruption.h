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

#ifndef AVRNNT_CORRUPTION_H_
#define AVRNNT_CORRUPTION_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "avrnnt/audio_frontend.h"

namespace avrnnt::eval {

double rms(const std::vector<double> &x, size_t begin = 0, size_t end = SIZE_MAX);

struct MixResult {
  dsp::Waveform audio;
  double noise_gain = 0.0;
  double clip_scale = 1.0;  // < 1 when the mixture had to be rescaled into [-1, 1]
};

// Adds noise (tiled or cropped to the speech length) at the requested SNR,
// measured against the RMS of the whole utterance.
MixResult mix_at_snr(const dsp::Waveform &speech, const dsp::Waveform &noise, double snr_db);

enum class OverlapPosition { kBegin, kEnd };

struct OverlapSpec {
  OverlapPosition position = OverlapPosition::kBegin;
  double duration_seconds = 2.0;
};

struct OverlapResult {
  dsp::Waveform audio;
  double gain = 0.0;
  int64_t overlap_samples = 0;
};

// Adds the start of the competing clip over the first or last seconds of the
// utterance, scaled to the energy of the utterance inside that window.
OverlapResult splice_overlap(const dsp::Waveform &utt, const dsp::Waveform &competing,
                             const OverlapSpec &spec);

struct MultistyleOptions {
  double probability = 0.10;
  double min_snr_db = 0.0;
  double max_snr_db = 20.0;
};

struct AugmentResult {
  dsp::Waveform audio;
  bool augmented = false;
  double snr_db = 0.0;
  int64_t pool_index = -1;
};

AugmentResult multistyle_augment(const dsp::Waveform &utt, const std::vector<dsp::Waveform> &pool,
                                 std::mt19937_64 &rng, const MultistyleOptions &options = {});

// Unit-RMS babble: a sum of talkers, each a low-passed noise source
// with a formant-like resonance and a syllable-rate envelope.
dsp::Waveform synthetic_babble(int64_t num_samples, uint64_t seed, int talkers = 6,
                               int sample_rate = dsp::kSampleRate);

// Whitespace tokens; when normalize is set, text is lowercased and
// punctuation other than apostrophes is dropped first.
std::vector<std::string> tokenize(const std::string &text, bool normalize = true);

struct WerReport {
  double wer = 0.0;  // percent
  int64_t substitutions = 0;
  int64_t deletions = 0;
  int64_t insertions = 0;
  int64_t num_ref_words = 0;
  bool degenerate = false;  // empty reference
  std::optional<double> ci_halfwidth_95;

  int64_t errors() const { return substitutions + deletions + insertions; }
};

WerReport word_error_rate(const std::vector<std::string> &ref, const std::vector<std::string> &hyp);

// Sums the per-utterance counts into one corpus report.
WerReport aggregate(const std::vector<WerReport> &utterances);

enum class CiMethod { kBootstrap, kNormal };

struct CiOptions {
  CiMethod method = CiMethod::kBootstrap;
  int resamples = 10000;
  uint64_t seed = 17;
};

// Half width, in WER percent, of the 95% interval of the corpus WER.
double confidence_interval_95(const std::vector<int64_t> &errors,
                              const std::vector<int64_t> &ref_words, const CiOptions &options = {});

struct FaceMetadata {
  std::optional<double> eye_distance_px;
  std::optional<double> bbox_diagonal_px;
  std::optional<double> pan_deg;
  std::optional<double> tilt_deg;
};

enum class Quality { kHigh, kLow };

Quality quality_bucket(const FaceMetadata &meta);

}  // namespace avrnnt::eval

#endif  // AVRNNT_CORRUPTION_H_
