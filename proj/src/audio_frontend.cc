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

#include "avrnnt/audio_frontend.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "avrnnt/error.h"

namespace avrnnt::dsp {

namespace {

void check_sample_rate(int sample_rate) {
  if (sample_rate != kSampleRate) {
    throw Error(ErrorCode::kUnsupportedSampleRate,
                "feature extraction requires 16000 Hz, got " + std::to_string(sample_rate));
  }
}

void check_video_fps(const Rational &fps) {
  Rational r = fps.normalized();
  if (r.den <= 0 || r.num < 23 * r.den || r.num > 30 * r.den) {
    throw Error(ErrorCode::kUnsupportedFrameRate,
                "video frame rate must be within [23, 30] fps, got " + to_string(fps));
  }
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> hann_window(int length) {
  std::vector<double> w(length, 1.0);
  if (length == 1) return w;
  for (int n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (length - 1));
  }
  return w;
}

FramingPlan make_fixed_plan(int64_t num_samples, int sample_rate) {
  check_sample_rate(sample_rate);
  FramingPlan plan;
  plan.mode = FrameRateMode::kFixed10msDecimate3;
  plan.sample_rate = sample_rate;
  for (int64_t off = 0; off + kWindowLength <= num_samples; off += kFixedHop) {
    plan.offsets.push_back(off);
  }
  return plan;
}

FramingPlan make_variable_hop_schedule(const Rational &video_fps, int64_t num_video_frames,
                                       int sample_rate) {
  check_sample_rate(sample_rate);
  check_video_fps(video_fps);
  if (num_video_frames < 1) {
    throw Error(ErrorCode::kEmptyInput, "need at least one video frame");
  }
  const Rational fps = video_fps.normalized();
  FramingPlan plan;
  plan.mode = FrameRateMode::kVariableThirdOfVideoFrame;
  plan.video_fps = fps;
  plan.sample_rate = sample_rate;
  const int64_t count = kDecimation * num_video_frames;
  plan.offsets.reserve(count);
  // offset_k = round(k * sr * den / (3 * num)), rounding half up.
  const int64_t denom = 2 * kDecimation * fps.num;
  for (int64_t k = 0; k < count; ++k) {
    const int64_t numer = 2 * k * sample_rate * fps.den + kDecimation * fps.num;
    plan.offsets.push_back(numer / denom);
  }
  return plan;
}

Spectrogram compute_stft(const Waveform &w, const FramingPlan &plan) {
  check_sample_rate(w.sample_rate);
  const int64_t len = static_cast<int64_t>(w.samples.size());
  if (len < plan.window_length) {
    throw Error(ErrorCode::kEmptyInput, "waveform shorter than one analysis window");
  }
  const std::vector<double> window = hann_window(plan.window_length);
  int64_t frames = 0;
  while (frames < static_cast<int64_t>(plan.offsets.size()) &&
         plan.offsets[frames] + plan.window_length <= len) {
    ++frames;
  }

  const int bins = kFftSize / 2 + 1;
  Spectrogram out(frames, bins);
  Eigen::FFT<double> fft;
  std::vector<double> buf(kFftSize, 0.0);
  std::vector<std::complex<double>> spec;
  for (int64_t f = 0; f < frames; ++f) {
    const int64_t off = plan.offsets[f];
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int n = 0; n < plan.window_length; ++n) buf[n] = w.samples[off + n] * window[n];
    fft.fwd(spec, buf);
    for (int k = 0; k < bins; ++k) out(f, k) = spec[k];
  }
  return out;
}

MelFilterbank build_mel_filterbank(int num_filters, int fft_size, int sample_rate,
                                   double low_hz, double high_hz) {
  if (num_filters < 1 || fft_size < 2 || sample_rate <= 0 || !(low_hz >= 0.0) ||
      !(low_hz < high_hz) || high_hz > sample_rate / 2.0) {
    throw Error(ErrorCode::kInvalidFilterSpec,
                "need num_filters >= 1 and 0 <= low_hz < high_hz <= sample_rate / 2");
  }
  MelFilterbank fb;
  fb.num_filters = num_filters;
  fb.fft_size = fft_size;
  fb.low_hz = low_hz;
  fb.high_hz = high_hz;
  const int bins = fft_size / 2 + 1;
  fb.weights = Matrix::Zero(num_filters, bins);

  const double mel_lo = hz_to_mel(low_hz);
  const double mel_hi = hz_to_mel(high_hz);
  const double step = (mel_hi - mel_lo) / (num_filters + 1);
  for (int m = 0; m < num_filters; ++m) {
    const double left = mel_lo + m * step;
    const double center = left + step;
    const double right = center + step;
    fb.center_hz.push_back(mel_to_hz(center));
    for (int k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sample_rate / fft_size);
      if (mel <= left || mel >= right) continue;
      fb.weights(m, k) = mel <= center ? (mel - left) / step : (right - mel) / step;
    }
  }
  return fb;
}

Matrix log_mel(const Spectrogram &spectrogram, const MelFilterbank &fb, double floor) {
  if (spectrogram.cols() != fb.weights.cols()) {
    throw Error(ErrorCode::kShapeError, "spectrogram has " + std::to_string(spectrogram.cols()) +
                                            " bins, filterbank expects " +
                                            std::to_string(fb.weights.cols()));
  }
  Matrix power = spectrogram.cwiseAbs2();
  Matrix out = power * fb.weights.transpose();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out.data()[i] = std::log(std::max(floor, out.data()[i]));
  }
  return out;
}

FeatureSequence stack_and_decimate(const Matrix &features, FrameRateMode mode,
                                   const std::vector<double> &frame_times) {
  const int64_t n = features.rows();
  const int64_t dim = features.cols();
  const int64_t width = kStackLeft + 1 + kStackRight;
  FeatureSequence seq;
  seq.mode = mode;
  const int64_t kept = (n + kDecimation - 1) / kDecimation;
  seq.frames.resize(kept, width * dim);
  seq.timestamps.reserve(kept);
  for (int64_t o = 0; o < kept; ++o) {
    const int64_t t = o * kDecimation;
    for (int64_t j = -kStackLeft; j <= kStackRight; ++j) {
      const int64_t src = std::clamp<int64_t>(t + j, 0, n - 1);
      seq.frames.block(o, (j + kStackLeft) * dim, 1, dim) = features.row(src);
    }
    if (!frame_times.empty()) {
      seq.timestamps.push_back(frame_times[t]);
    } else {
      seq.timestamps.push_back(
          (static_cast<double>(t) * kFixedHop + kWindowLength / 2.0) / kSampleRate);
    }
  }
  return seq;
}

FeatureSequence featurize(const Waveform &w, const FrontendConfig &config) {
  check_sample_rate(w.sample_rate);
  FramingPlan plan;
  if (config.mode == FrameRateMode::kFixed10msDecimate3) {
    plan = make_fixed_plan(static_cast<int64_t>(w.samples.size()), w.sample_rate);
  } else {
    check_video_fps(config.video_fps);
    const Rational fps = config.video_fps.normalized();
    int64_t frames = config.num_video_frames.value_or(
        static_cast<int64_t>(w.samples.size()) * fps.num / (fps.den * w.sample_rate));
    plan = make_variable_hop_schedule(fps, std::max<int64_t>(frames, 1), w.sample_rate);
  }
  const Spectrogram spec = compute_stft(w, plan);
  const MelFilterbank fb =
      build_mel_filterbank(config.num_filters, kFftSize, w.sample_rate, config.low_hz,
                           config.high_hz);
  const Matrix mel = log_mel(spec, fb);
  std::vector<double> times;
  times.reserve(mel.rows());
  for (Eigen::Index f = 0; f < mel.rows(); ++f) {
    times.push_back((static_cast<double>(plan.offsets[f]) + plan.window_length / 2.0) /
                    w.sample_rate);
  }
  return stack_and_decimate(mel, config.mode, times);
}

int64_t fixed_mode_output_frames(int64_t num_samples) {
  if (num_samples < kWindowLength) return 0;
  const int64_t analysis = (num_samples - kWindowLength) / kFixedHop + 1;
  return (analysis + kDecimation - 1) / kDecimation;
}

}  // namespace avrnnt::dsp
