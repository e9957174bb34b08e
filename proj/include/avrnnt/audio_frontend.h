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

// Log-mel audio features at a fixed 10 ms hop or at a hop locked to one third
// of the video frame period, followed by +/-2 frame stacking and 1-in-3
// decimation.

#ifndef AVRNNT_AUDIO_FRONTEND_H_
#define AVRNNT_AUDIO_FRONTEND_H_

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "avrnnt/types.h"

namespace avrnnt::dsp {

inline constexpr int kSampleRate = 16000;
inline constexpr int kWindowLength = 400;  // 25 ms at 16 kHz
inline constexpr int kFixedHop = 160;      // 10 ms at 16 kHz
inline constexpr int kFftSize = 512;
inline constexpr int kNumFilters = 80;
inline constexpr int kStackLeft = 2;
inline constexpr int kStackRight = 2;
inline constexpr int kDecimation = 3;
inline constexpr double kLogFloor = 1e-12;

struct Waveform {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate = kSampleRate;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

enum class FrameRateMode { kFixed10msDecimate3, kVariableThirdOfVideoFrame };

struct FramingPlan {
  FrameRateMode mode = FrameRateMode::kFixed10msDecimate3;
  Rational video_fps{0, 1};  // only meaningful in variable mode
  int sample_rate = kSampleRate;
  int window_length = kWindowLength;
  std::vector<int64_t> offsets;  // analysis-frame start samples, strictly increasing
};

struct MelFilterbank {
  int num_filters = 0;
  int fft_size = 0;
  double low_hz = 0.0;
  double high_hz = 0.0;
  std::vector<double> center_hz;
  Matrix weights;  // num_filters x (fft_size/2 + 1)
};

struct FeatureSequence {
  Matrix frames;                   // N x D
  std::vector<double> timestamps;  // frame-center times in seconds
  FrameRateMode mode = FrameRateMode::kFixed10msDecimate3;

  int64_t num_frames() const { return frames.rows(); }
  int64_t dim() const { return frames.cols(); }
};

using Spectrogram = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                  Eigen::RowMajor>;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Symmetric Hann window: 0.5 - 0.5 cos(2 pi n / (N - 1)).
std::vector<double> hann_window(int length);

// 10 ms offsets covering every full 25 ms window in num_samples.
FramingPlan make_fixed_plan(int64_t num_samples, int sample_rate = kSampleRate);

// Three analysis frames per video frame; offset_k = round(k * sr / (3 * fps))
// in exact integer arithmetic so the schedule never drifts by more than half
// a sample.
FramingPlan make_variable_hop_schedule(const Rational &video_fps, int64_t num_video_frames,
                                       int sample_rate = kSampleRate);

// Frames whose window would run past the end of the signal are dropped.
Spectrogram compute_stft(const Waveform &w, const FramingPlan &plan);

MelFilterbank build_mel_filterbank(int num_filters, int fft_size, int sample_rate,
                                   double low_hz, double high_hz);

Matrix log_mel(const Spectrogram &spectrogram, const MelFilterbank &fb,
               double floor = kLogFloor);

// Stacks +/-2 neighbours (edge frames replicated) and keeps frames 0 mod 3.
// frame_times holds the analysis-frame center times (one per input row);
// when empty, times are synthesized from the fixed 10 ms hop.
FeatureSequence stack_and_decimate(const Matrix &features, FrameRateMode mode,
                                   const std::vector<double> &frame_times = {});

struct FrontendConfig {
  FrameRateMode mode = FrameRateMode::kFixed10msDecimate3;
  Rational video_fps{30, 1};
  // Number of video frames to align with; derived from the audio duration
  // when absent.
  std::optional<int64_t> num_video_frames;
  int num_filters = kNumFilters;
  double low_hz = 125.0;
  double high_hz = 7500.0;
};

// End-to-end waveform -> stacked, decimated log-mel features.
FeatureSequence featurize(const Waveform &w, const FrontendConfig &config);

// ceil((floor((L - 400) / 160) + 1) / 3) for L >= 400, else 0.
int64_t fixed_mode_output_frames(int64_t num_samples);

}  // namespace avrnnt::dsp

#endif  // AVRNNT_AUDIO_FRONTEND_H_
