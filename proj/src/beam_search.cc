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

#include "avrnnt/beam_search.h"

#include <algorithm>
#include <map>

#include "avrnnt/error.h"
#include "avrnnt/transducer_loss.h"

namespace avrnnt::loss {

namespace {

struct Candidate {
  double log_score = kLogZero;
  DecoderHandle parent_state;  // state before the last label was consumed
  DecoderHandle state;         // set once the candidate is kept
  int last_label = -1;
};

using CandidateMap = std::map<std::vector<int>, Candidate>;

void merge(CandidateMap &into, std::vector<int> labels, double score, DecoderHandle parent,
           DecoderHandle state, int last_label) {
  auto [it, inserted] = into.try_emplace(std::move(labels));
  Candidate &c = it->second;
  if (inserted) {
    c.log_score = score;
    c.parent_state = std::move(parent);
    c.state = std::move(state);
    c.last_label = last_label;
  } else {
    c.log_score = logadd(c.log_score, score);
  }
}

// Top `width` entries, best score first, ties broken by label order.
std::vector<CandidateMap::const_iterator> top(const CandidateMap &m, int width) {
  std::vector<CandidateMap::const_iterator> all;
  all.reserve(m.size());
  for (auto it = m.begin(); it != m.end(); ++it) all.push_back(it);
  auto better = [](const auto &a, const auto &b) {
    if (a->second.log_score != b->second.log_score) {
      return a->second.log_score > b->second.log_score;
    }
    return a->first < b->first;
  };
  const size_t keep = std::min<size_t>(all.size(), static_cast<size_t>(width));
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), better);
  all.resize(keep);
  return all;
}

}  // namespace

std::vector<BeamHypothesis> beam_decode(const TransducerScorer &scorer,
                                        const BeamOptions &options) {
  if (scorer.num_frames() <= 0) throw Error(ErrorCode::kEmptyInput, "no encoder frames");
  if (options.beam_width < 1) throw Error(ErrorCode::kConfigError, "beam_width must be >= 1");
  const int blank = scorer.blank();
  const int vocab = scorer.vocab_size();

  std::vector<BeamHypothesis> beam{{{}, 0.0, scorer.initial_state()}};
  for (int t = 0; t < scorer.num_frames(); ++t) {
    CandidateMap ended;
    std::vector<BeamHypothesis> frontier = std::move(beam);
    for (int level = 0; !frontier.empty(); ++level) {
      CandidateMap expanded;
      for (const BeamHypothesis &hyp : frontier) {
        const Vector lp = scorer.log_probs(t, hyp.decoder_state);
        merge(ended, hyp.labels, hyp.log_score + lp(blank), nullptr, hyp.decoder_state, -1);
        if (level >= options.max_symbols_per_frame) continue;
        for (int k = 0; k < vocab; ++k) {
          if (k == blank) continue;
          std::vector<int> labels = hyp.labels;
          labels.push_back(k);
          merge(expanded, std::move(labels), hyp.log_score + lp(k), hyp.decoder_state, nullptr,
                k);
        }
      }
      frontier.clear();
      for (auto it : top(expanded, options.beam_width)) {
        const Candidate &c = it->second;
        frontier.push_back({it->first, c.log_score, scorer.advance(c.parent_state, c.last_label)});
      }
    }
    beam.clear();
    for (auto it : top(ended, options.beam_width)) {
      beam.push_back({it->first, it->second.log_score, it->second.state});
    }
  }
  return beam;
}

}  // namespace avrnnt::loss
