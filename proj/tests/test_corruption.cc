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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "avrnnt/corruption.h"
#include "avrnnt/error.h"
#include "doctest.h"
#include "test_util.h"

using namespace avrnnt;
using namespace avrnnt::eval;

namespace {

double db(double ratio) { return 10.0 * std::log10(ratio); }

// Minimal edit distance by exhaustive recursion over edit operations.
int brute_edit(const std::vector<std::string> &a, size_t i, const std::vector<std::string> &b,
               size_t j) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  return std::min({brute_edit(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1),
                   brute_edit(a, i + 1, b, j) + 1, brute_edit(a, i, b, j + 1) + 1});
}

std::vector<std::string> random_words(std::mt19937_64 &rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len), sym(0, 2);
  std::vector<std::string> w(static_cast<size_t>(len(rng)));
  for (auto &s : w) s = std::string(1, static_cast<char>('a' + sym(rng)));
  return w;
}

}  // namespace

TEST_CASE("mixing hits the requested SNR") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const dsp::Waveform speech = testing::white_noise(8000, 0.05, seed);
    const dsp::Waveform noise = synthetic_babble(5000, seed + 100);
    for (double snr : {0.0, 10.0, 20.0}) {
      const MixResult m = mix_at_snr(speech, noise, snr);
      CHECK(m.clip_scale == 1.0);
      std::vector<double> added(speech.samples.size());
      for (size_t i = 0; i < added.size(); ++i) added[i] = m.audio.samples[i] - speech.samples[i];
      const double measured = db(std::pow(rms(speech.samples) / rms(added), 2));
      CHECK(std::abs(measured - snr) < 0.1);
    }
  }
}

TEST_CASE("huge SNR leaves the speech untouched") {
  const dsp::Waveform speech = testing::sine(440, 0.5);
  const MixResult m = mix_at_snr(speech, testing::white_noise(1000, 1.0, 3), 200.0);
  double dev = 0.0;
  for (size_t i = 0; i < speech.samples.size(); ++i) {
    dev = std::max(dev, std::abs(m.audio.samples[i] - speech.samples[i]));
  }
  CHECK(dev < 1e-8);
}

TEST_CASE("independent signals add in power, and clipping rescales the whole mix") {
  const dsp::Waveform a = testing::white_noise(160000, 1.0, 1);
  const dsp::Waveform b = testing::white_noise(160000, 1.0, 2);
  const MixResult m = mix_at_snr(a, b, 10.0);
  CHECK(m.clip_scale < 1.0);
  double peak = 0.0;
  for (double v : m.audio.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak <= 1.0);
  const double power = std::pow(rms(m.audio.samples) / m.clip_scale, 2);
  CHECK(std::abs(power - std::pow(rms(a.samples), 2) * 1.1) < 0.01);
}

TEST_CASE("degenerate mixing inputs") {
  dsp::Waveform silent;
  silent.samples.assign(100, 0.0);
  try {
    mix_at_snr(silent, testing::white_noise(100, 1.0, 1), 0.0);
    FAIL("expected DegenerateSnr");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDegenerateSnr);
  }
  dsp::Waveform other_rate = testing::white_noise(100, 1.0, 1);
  other_rate.sample_rate = 8000;
  CHECK_THROWS_AS(mix_at_snr(testing::sine(100, 0.1), other_rate, 0.0), Error);
}

TEST_CASE("overlap splicing") {
  const dsp::Waveform utt = testing::sine(220, 5.0, 0.3);
  const dsp::Waveform comp = synthetic_babble(3 * 16000, 9);

  const OverlapResult none = splice_overlap(utt, comp, {OverlapPosition::kBegin, 0.0});
  CHECK(none.audio.samples == utt.samples);

  for (OverlapPosition pos : {OverlapPosition::kBegin, OverlapPosition::kEnd}) {
    const OverlapResult r = splice_overlap(utt, comp, {pos, 2.0});
    CHECK(r.overlap_samples == 32000);
    const size_t lo = pos == OverlapPosition::kBegin ? 0 : 48000;
    const size_t hi = lo + 32000;
    std::vector<double> diff(utt.samples.size());
    bool outside_same = true;
    for (size_t i = 0; i < diff.size(); ++i) {
      diff[i] = r.audio.samples[i] - utt.samples[i];
      if ((i < lo || i >= hi) && r.audio.samples[i] != utt.samples[i]) outside_same = false;
    }
    CHECK(outside_same);
    CHECK(std::abs(db(rms(diff, lo, hi) / rms(utt.samples, lo, hi)) * 2.0) < 0.1);
  }

  const dsp::Waveform short_utt = testing::sine(220, 1.0, 0.3);
  const OverlapResult t = splice_overlap(short_utt, comp, {OverlapPosition::kEnd, 2.0});
  CHECK(t.overlap_samples == 16000);
  CHECK_THROWS_AS(splice_overlap(utt, testing::sine(300, 1.0), {OverlapPosition::kBegin, 2.0}),
                  Error);
}

TEST_CASE("multistyle augmentation") {
  const dsp::Waveform utt = testing::white_noise(64, 0.1, 4);
  const std::vector<dsp::Waveform> pool = {testing::white_noise(50, 0.2, 5),
                                           testing::white_noise(80, 0.3, 6)};
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const AugmentResult r = multistyle_augment(utt, pool, rng, {0.0, 0.0, 20.0});
    CHECK_FALSE(r.augmented);
    CHECK(r.audio.samples == utt.samples);
  }
  for (int i = 0; i < 20; ++i) {
    const AugmentResult r = multistyle_augment(utt, pool, rng, {1.0, 0.0, 0.0});
    REQUIRE(r.augmented);
    std::vector<double> added(utt.samples.size());
    for (size_t k = 0; k < added.size(); ++k) added[k] = r.audio.samples[k] - utt.samples[k];
    CHECK(std::abs(db(rms(added) / rms(utt.samples))) < 1e-9);
  }

  std::vector<double> snrs;
  int count = 0;
  for (int i = 0; i < 10000; ++i) {
    const AugmentResult r = multistyle_augment(utt, pool, rng);
    if (r.augmented) {
      ++count;
      snrs.push_back(r.snr_db);
    }
  }
  CHECK(count >= 910);
  CHECK(count <= 1090);
  // One-sample Kolmogorov-Smirnov against U(0, 20) at alpha = 0.01.
  std::sort(snrs.begin(), snrs.end());
  double ks = 0.0;
  const double n = static_cast<double>(snrs.size());
  for (size_t i = 0; i < snrs.size(); ++i) {
    const double f = snrs[i] / 20.0;
    ks = std::max({ks, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  CHECK(ks < 1.628 / std::sqrt(n));
  CHECK_THROWS_AS(multistyle_augment(utt, {}, rng), Error);
}

TEST_CASE("synthetic babble") {
  const dsp::Waveform a = synthetic_babble(16000, 3);
  CHECK(rms(a.samples) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(synthetic_babble(16000, 3).samples == a.samples);
  CHECK(synthetic_babble(16000, 4).samples != a.samples);
}

TEST_CASE("tokenization") {
  CHECK(tokenize("Hello, World!  it's") == std::vector<std::string>{"hello", "world", "it's"});
  CHECK(tokenize("Hello, World!", false) == std::vector<std::string>{"Hello,", "World!"});
  CHECK(tokenize("   ").empty());
}

TEST_CASE("word error rate examples") {
  const WerReport same = word_error_rate(tokenize("a b c"), tokenize("a b c"));
  CHECK(same.wer == 0.0);
  CHECK(same.errors() == 0);

  const WerReport r = word_error_rate(tokenize("a b c"), tokenize("a x c d"));
  CHECK(r.substitutions == 1);
  CHECK(r.insertions == 1);
  CHECK(r.deletions == 0);
  CHECK(r.wer == doctest::Approx(200.0 / 3.0));

  const WerReport del = word_error_rate(tokenize("a b"), {});
  CHECK(del.deletions == 2);
  CHECK(del.wer == 100.0);

  const WerReport empty = word_error_rate({}, tokenize("x y"));
  CHECK(empty.degenerate);
  CHECK(empty.insertions == 2);
  CHECK(empty.wer == 200.0);

  // Equal-cost alignments resolve to substitutions first.
  const WerReport swap = word_error_rate(tokenize("a b"), tokenize("b a"));
  CHECK(swap.substitutions == 2);
  CHECK(swap.deletions + swap.insertions == 0);
}

TEST_CASE("edit distance equals exhaustive minimum") {
  std::vector<std::vector<std::string>> all = {{}};
  for (int len = 1; len <= 3; ++len) {
    const size_t prev = all.size();
    for (size_t k = 0; k < prev; ++k) {
      if (all[k].size() != static_cast<size_t>(len - 1)) continue;
      for (char c : {'a', 'b', 'c'}) {
        auto w = all[k];
        w.push_back(std::string(1, c));
        all.push_back(w);
      }
    }
  }
  auto check_pair = [](const std::vector<std::string> &ref, const std::vector<std::string> &hyp) {
    const WerReport r = word_error_rate(ref, hyp);
    const WerReport s = word_error_rate(hyp, ref);
    const bool ok = r.errors() == brute_edit(ref, 0, hyp, 0) &&
                    r.deletions - r.insertions ==
                        static_cast<int64_t>(ref.size()) - static_cast<int64_t>(hyp.size()) &&
                    s.errors() == r.errors();
    return ok;
  };
  int bad = 0;
  for (const auto &a : all) {
    for (const auto &b : all) bad += !check_pair(a, b);
  }
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) bad += !check_pair(random_words(rng, 6), random_words(rng, 6));
  CHECK(bad == 0);
}

TEST_CASE("confidence intervals") {
  std::vector<int64_t> errs(50, 2), words(50, 10);
  CHECK(confidence_interval_95(errs, words) == 0.0);

  std::mt19937_64 rng(5);
  std::bernoulli_distribution word_error(0.2);
  errs.assign(1000, 0);
  words.assign(1000, 10);
  for (auto &e : errs) {
    for (int w = 0; w < 10; ++w) e += word_error(rng);
  }
  const double closed = 1.96 * std::sqrt(0.2 * 0.8 / 10000.0) * 100.0;
  const double boot = confidence_interval_95(errs, words);
  const double normal = confidence_interval_95(errs, words, {CiMethod::kNormal});
  CHECK(std::abs(boot / closed - 1.0) < 0.2);
  CHECK(std::abs(normal / closed - 1.0) < 0.2);
  CHECK(confidence_interval_95(errs, words) == boot);
  CHECK(confidence_interval_95(errs, words, {CiMethod::kBootstrap, 10000, 18}) != boot);

  try {
    confidence_interval_95({1}, {5});
    FAIL("expected UndefinedCi");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kUndefinedCi);
  }
}

TEST_CASE("face quality buckets") {
  CHECK(quality_bucket({80, 300, 30, 9.9}) == Quality::kHigh);
  CHECK(quality_bucket({79, 1000, 0, 0}) == Quality::kLow);
  CHECK(quality_bucket({200, 400, -31, 0}) == Quality::kLow);
  CHECK(quality_bucket({200, 400, 0, -10}) == Quality::kLow);
  try {
    quality_bucket({200, 400, std::nullopt, 0});
    FAIL("expected MissingMetadata");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kMissingMetadata);
  }
}
