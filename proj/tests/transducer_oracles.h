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

// Oracles for the transducer lattice and beam search: brute-force alignment
// enumeration and a small table-driven scorer whose exact sequence scores can
// be enumerated.

#ifndef AVRNNT_TESTS_TRANSDUCER_ORACLES_H_
#define AVRNNT_TESTS_TRANSDUCER_ORACLES_H_

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "avrnnt/beam_search.h"
#include "avrnnt/types.h"

namespace avrnnt::testing {

inline double log_sum(const std::vector<double> &terms) {
  double max = -std::numeric_limits<double>::infinity();
  for (double t : terms) max = std::max(max, t);
  if (max == -std::numeric_limits<double>::infinity()) return max;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - max);
  return max + std::log(s);
}

// Sums over every arrangement of T blanks and U labels (C(T+U, U) of them).
// An arrangement is a monotone walk from (0, 0); it has probability zero when
// it needs a lattice point past the last frame, i.e. unless it ends in the
// blank that leaves (T-1, U).
inline double brute_force_log_likelihood(const Tensor3 &lp, const std::vector<int> &labels,
                                         int blank) {
  const int frames = static_cast<int>(lp.dim0());
  const int u_max = static_cast<int>(labels.size());
  std::vector<double> terms;
  std::vector<int> moves;  // 0 = blank, 1 = label
  std::function<void(int, int)> rec = [&](int blanks, int emits) {
    if (blanks == frames && emits == u_max) {
      int t = 0, u = 0;
      double score = 0.0;
      for (int m : moves) {
        if (t >= frames) return;  // label after the final frame: impossible
        if (m == 0) {
          score += lp(t, u, blank);
          ++t;
        } else {
          score += lp(t, u, labels[u]);
          ++u;
        }
      }
      terms.push_back(score);
      return;
    }
    if (blanks < frames) {
      moves.push_back(0);
      rec(blanks + 1, emits);
      moves.pop_back();
    }
    if (emits < u_max) {
      moves.push_back(1);
      rec(blanks, emits + 1);
      moves.pop_back();
    }
  };
  rec(0, 0);
  return log_sum(terms);
}

inline Tensor3 random_lattice(int frames, int labels, int vocab, std::mt19937_64 &rng,
                              bool normalize = true) {
  std::normal_distribution<double> normal(0.0, 1.5);
  Tensor3 lp(frames, labels + 1, vocab);
  for (int t = 0; t < frames; ++t) {
    for (int u = 0; u <= labels; ++u) {
      std::vector<double> row(vocab);
      for (auto &x : row) x = normal(rng);
      const double z = normalize ? log_sum(row) : 0.0;
      for (int v = 0; v < vocab; ++v) lp(t, u, v) = row[v] - z;
    }
  }
  return lp;
}

// Scorer whose posterior depends on the frame and the full label history via
// hashed random tables; the decoder state is the label history itself.
class TableScorer : public loss::TransducerScorer {
 public:
  struct History : loss::DecoderState {
    std::vector<int> labels;
  };

  TableScorer(int frames, int vocab, uint64_t seed, double sharpness = 2.0)
      : frames_(frames), vocab_(vocab), seed_(seed), sharpness_(sharpness) {}

  int vocab_size() const override { return vocab_; }
  int blank() const override { return 0; }
  int num_frames() const override { return frames_; }
  loss::DecoderHandle initial_state() const override { return std::make_shared<History>(); }
  loss::DecoderHandle advance(const loss::DecoderHandle &state, int label) const override {
    auto next = std::make_shared<History>(static_cast<const History &>(*state));
    next->labels.push_back(label);
    return next;
  }
  Vector log_probs(int frame, const loss::DecoderHandle &state) const override {
    return table(frame, static_cast<const History &>(*state).labels);
  }

  Vector table(int frame, const std::vector<int> &history) const {
    auto key = std::make_pair(frame, history);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    uint64_t h = seed_ * 0x9E3779B97F4A7C15ull + static_cast<uint64_t>(frame) * 1315423911ull;
    for (int y : history) h = (h ^ static_cast<uint64_t>(y + 1)) * 0x100000001B3ull;
    std::mt19937_64 rng(h);
    std::normal_distribution<double> normal(0.0, sharpness_);
    std::vector<double> row(vocab_);
    for (auto &x : row) x = normal(rng);
    const double z = log_sum(row);
    Vector v(vocab_);
    for (int k = 0; k < vocab_; ++k) v(k) = row[k] - z;
    cache_[key] = v;
    return v;
  }

 private:
  int frames_, vocab_;
  uint64_t seed_;
  double sharpness_;
  mutable std::map<std::pair<int, std::vector<int>>, Vector> cache_;
};

// Exact score of every label sequence reachable with at most `cap` symbols
// per frame, by enumerating per-frame emission counts.
inline std::map<std::vector<int>, double> exhaustive_scores(const TableScorer &s, int cap) {
  std::map<std::vector<int>, std::vector<double>> terms;
  std::function<void(int, std::vector<int> &, double)> rec = [&](int t, std::vector<int> &y,
                                                                  double score) {
    if (t == s.num_frames()) {
      terms[y].push_back(score);
      return;
    }
    // Emit n symbols in frame t, then the blank.
    std::function<void(int, double)> emit = [&](int n, double sc) {
      const Vector lp = s.table(t, y);
      rec(t + 1, y, sc + lp(0));
      if (n == cap) return;
      for (int k = 1; k < s.vocab_size(); ++k) {
        y.push_back(k);
        emit(n + 1, sc + lp(k));
        y.pop_back();
      }
    };
    emit(0, score);
  };
  std::vector<int> y;
  rec(0, y, 0.0);
  std::map<std::vector<int>, double> out;
  for (auto &[seq, ts] : terms) out[seq] = log_sum(ts);
  return out;
}

}  // namespace avrnnt::testing

#endif  // AVRNNT_TESTS_TRANSDUCER_ORACLES_H_
