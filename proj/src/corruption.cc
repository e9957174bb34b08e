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

#include "avrnnt/corruption.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "avrnnt/error.h"

namespace avrnnt::eval {

double rms(const std::vector<double> &x, size_t begin, size_t end) {
  end = std::min(end, x.size());
  if (begin >= end) return 0.0;
  double acc = 0.0;
  for (size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(end - begin));
}

MixResult mix_at_snr(const dsp::Waveform &speech, const dsp::Waveform &noise, double snr_db) {
  if (speech.sample_rate != noise.sample_rate) {
    throw Error(ErrorCode::kUnsupportedSampleRate, "speech and noise sample rates differ");
  }
  if (noise.samples.empty()) throw Error(ErrorCode::kEmptyInput, "noise waveform is empty");
  const size_t n = speech.samples.size();
  std::vector<double> tiled(n);
  for (size_t i = 0; i < n; ++i) tiled[i] = noise.samples[i % noise.samples.size()];

  const double speech_rms = rms(speech.samples);
  const double noise_rms = rms(tiled);
  if (speech_rms == 0.0) throw Error(ErrorCode::kDegenerateSnr, "speech is silent");
  if (noise_rms == 0.0) throw Error(ErrorCode::kDegenerateSnr, "noise is silent");

  MixResult out;
  out.noise_gain = speech_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  out.audio.sample_rate = speech.sample_rate;
  out.audio.samples.resize(n);
  double peak = 0.0;
  for (size_t i = 0; i < n; ++i) {
    out.audio.samples[i] = speech.samples[i] + out.noise_gain * tiled[i];
    peak = std::max(peak, std::abs(out.audio.samples[i]));
  }
  if (peak > 1.0) {
    // Scaling the whole mixture keeps the SNR intact.
    out.clip_scale = 1.0 / peak;
    for (double &v : out.audio.samples) v *= out.clip_scale;
  }
  return out;
}

OverlapResult splice_overlap(const dsp::Waveform &utt, const dsp::Waveform &competing,
                             const OverlapSpec &spec) {
  if (utt.sample_rate != competing.sample_rate) {
    throw Error(ErrorCode::kUnsupportedSampleRate, "utterance and competing sample rates differ");
  }
  if (!(spec.duration_seconds >= 0.0)) throw Error(ErrorCode::kConfigError, "negative overlap");
  const auto wanted = static_cast<size_t>(std::llround(spec.duration_seconds * utt.sample_rate));
  if (competing.samples.size() < wanted) {
    throw Error(ErrorCode::kShapeError, "competing clip is shorter than the overlap");
  }
  const size_t n = std::min(wanted, utt.samples.size());
  const size_t start = spec.position == OverlapPosition::kBegin ? 0 : utt.samples.size() - n;

  OverlapResult out;
  out.audio = utt;
  out.overlap_samples = static_cast<int64_t>(n);
  if (n == 0) return out;
  const double target = rms(utt.samples, start, start + n);
  const double source = rms(competing.samples, 0, n);
  if (source == 0.0) throw Error(ErrorCode::kDegenerateSnr, "competing speech is silent");
  out.gain = target / source;
  for (size_t i = 0; i < n; ++i) out.audio.samples[start + i] += out.gain * competing.samples[i];
  return out;
}

AugmentResult multistyle_augment(const dsp::Waveform &utt, const std::vector<dsp::Waveform> &pool,
                                 std::mt19937_64 &rng, const MultistyleOptions &options) {
  if (pool.empty()) throw Error(ErrorCode::kEmptyInput, "augmentation pool is empty");
  AugmentResult out;
  std::bernoulli_distribution coin(options.probability);
  if (!coin(rng)) {
    out.audio = utt;
    return out;
  }
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> level(options.min_snr_db, options.max_snr_db);
  out.pool_index = static_cast<int64_t>(pick(rng));
  out.snr_db = options.max_snr_db > options.min_snr_db ? level(rng) : options.min_snr_db;
  out.audio = mix_at_snr(utt, pool[static_cast<size_t>(out.pool_index)], out.snr_db).audio;
  out.augmented = true;
  return out;
}

dsp::Waveform synthetic_babble(int64_t num_samples, uint64_t seed, int talkers, int sample_rate) {
  if (talkers < 1) throw Error(ErrorCode::kConfigError, "babble needs at least one talker");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> white(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pi = std::numbers::pi;
  dsp::Waveform out;
  out.sample_rate = sample_rate;
  out.samples.assign(static_cast<size_t>(std::max<int64_t>(num_samples, 0)), 0.0);
  for (int k = 0; k < talkers; ++k) {
    const double formant = 300.0 + 1200.0 * unit(rng);
    const double radius = std::exp(-pi * 200.0 / sample_rate);
    const double a1 = 2.0 * radius * std::cos(2.0 * pi * formant / sample_rate);
    const double a2 = -radius * radius;
    const double rate = 3.0 + 3.0 * unit(rng);
    const double phase = 2.0 * pi * unit(rng);
    double y1 = 0.0, y2 = 0.0, lp = 0.0;
    for (size_t i = 0; i < out.samples.size(); ++i) {
      lp = 0.9 * lp + 0.1 * white(rng);
      const double y = lp + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      const double env = 0.5 * (1.0 + std::sin(2.0 * pi * rate * i / sample_rate + phase));
      out.samples[i] += env * env * y;
    }
  }
  const double level = rms(out.samples);
  if (level > 0.0) {
    for (double &v : out.samples) v /= level;
  }
  return out;
}

std::vector<std::string> tokenize(const std::string &text, bool normalize) {
  std::string clean;
  clean.reserve(text.size());
  for (unsigned char c : text) {
    if (normalize && std::ispunct(c) && c != '\'') {
      clean.push_back(' ');
    } else {
      clean.push_back(normalize ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    }
  }
  std::istringstream in(clean);
  std::vector<std::string> tokens;
  for (std::string w; in >> w;) tokens.push_back(w);
  return tokens;
}

WerReport word_error_rate(const std::vector<std::string> &ref,
                          const std::vector<std::string> &hyp) {
  const size_t r = ref.size(), h = hyp.size();
  std::vector<std::vector<int64_t>> d(r + 1, std::vector<int64_t>(h + 1));
  for (size_t i = 0; i <= r; ++i) d[i][0] = static_cast<int64_t>(i);
  for (size_t j = 0; j <= h; ++j) d[0][j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= r; ++i) {
    for (size_t j = 1; j <= h; ++j) {
      const int64_t diag = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({diag, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  WerReport rep;
  rep.num_ref_words = static_cast<int64_t>(r);
  size_t i = r, j = h;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      rep.substitutions += ref[i - 1] == hyp[j - 1] ? 0 : 1;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++rep.deletions;
      --i;
    } else {
      ++rep.insertions;
      --j;
    }
  }
  if (r == 0) {
    rep.degenerate = true;
    rep.wer = 100.0 * static_cast<double>(rep.insertions);
  } else {
    rep.wer = 100.0 * static_cast<double>(rep.errors()) / static_cast<double>(r);
  }
  return rep;
}

WerReport aggregate(const std::vector<WerReport> &utterances) {
  WerReport total;
  for (const WerReport &u : utterances) {
    total.substitutions += u.substitutions;
    total.deletions += u.deletions;
    total.insertions += u.insertions;
    total.num_ref_words += u.num_ref_words;
  }
  if (total.num_ref_words == 0) {
    total.degenerate = true;
    total.wer = 100.0 * static_cast<double>(total.errors());
  } else {
    total.wer = 100.0 * static_cast<double>(total.errors()) / static_cast<double>(total.num_ref_words);
  }
  return total;
}

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double percentile(std::vector<double> &sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double confidence_interval_95(const std::vector<int64_t> &errors,
                              const std::vector<int64_t> &ref_words, const CiOptions &options) {
  if (errors.size() != ref_words.size()) {
    throw Error(ErrorCode::kShapeError, "errors and ref_words differ in length");
  }
  const size_t n = errors.size();
  if (n < 2) throw Error(ErrorCode::kUndefinedCi, "need at least two utterances");
  double total_err = 0.0, total_words = 0.0;
  for (size_t i = 0; i < n; ++i) {
    total_err += static_cast<double>(errors[i]);
    total_words += static_cast<double>(ref_words[i]);
  }
  if (total_words <= 0.0) throw Error(ErrorCode::kUndefinedCi, "no reference words");

  if (options.method == CiMethod::kNormal) {
    // Delta-method variance of the ratio estimator sum(e) / sum(w).
    const double ratio = total_err / total_words;
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = static_cast<double>(errors[i]) - ratio * static_cast<double>(ref_words[i]);
      ss += r * r;
    }
    const double var = ss * static_cast<double>(n) / static_cast<double>(n - 1) /
                       (total_words * total_words);
    return 100.0 * 1.959963984540054 * std::sqrt(var);
  }

  if (options.resamples < 2) throw Error(ErrorCode::kConfigError, "need at least two resamples");
  std::vector<double> stats(static_cast<size_t>(options.resamples));
  std::uniform_int_distribution<size_t> pick(0, n - 1);
  for (int b = 0; b < options.resamples; ++b) {
    // Independent stream per resample so the result does not depend on order.
    std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(static_cast<uint64_t>(b))));
    double e = 0.0, w = 0.0;
    for (size_t k = 0; k < n; ++k) {
      const size_t i = pick(rng);
      e += static_cast<double>(errors[i]);
      w += static_cast<double>(ref_words[i]);
    }
    stats[static_cast<size_t>(b)] = w > 0.0 ? 100.0 * e / w : 100.0 * e;
  }
  std::sort(stats.begin(), stats.end());
  return 0.5 * (percentile(stats, 0.975) - percentile(stats, 0.025));
}

Quality quality_bucket(const FaceMetadata &meta) {
  if (!meta.eye_distance_px || !meta.bbox_diagonal_px || !meta.pan_deg || !meta.tilt_deg) {
    throw Error(ErrorCode::kMissingMetadata, "face metadata is incomplete");
  }
  const bool high = *meta.eye_distance_px >= 80.0 && *meta.bbox_diagonal_px >= 300.0 &&
                    std::abs(*meta.pan_deg) <= 30.0 && std::abs(*meta.tilt_deg) < 10.0;
  return high ? Quality::kHigh : Quality::kLow;
}

}  // namespace avrnnt::eval
