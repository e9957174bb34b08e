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

// Frame-synchronous beam search for transducer models.

#ifndef AVRNNT_BEAM_SEARCH_H_
#define AVRNNT_BEAM_SEARCH_H_

#include <memory>
#include <vector>

#include "avrnnt/types.h"

namespace avrnnt::loss {

// Recurrent prediction-network state; concrete types belong to the scorer.
struct DecoderState {
  virtual ~DecoderState() = default;
};
using DecoderHandle = std::shared_ptr<const DecoderState>;

// What the search needs from a model: prediction-network stepping and the
// joint log-posterior at (frame, decoder state).
class TransducerScorer {
 public:
  virtual ~TransducerScorer() = default;
  virtual int vocab_size() const = 0;
  virtual int blank() const = 0;
  virtual int num_frames() const = 0;
  virtual DecoderHandle initial_state() const = 0;
  virtual DecoderHandle advance(const DecoderHandle &state, int label) const = 0;
  virtual Vector log_probs(int frame, const DecoderHandle &state) const = 0;
};

struct BeamHypothesis {
  std::vector<int> labels;
  double log_score = 0.0;
  DecoderHandle decoder_state;
};

struct BeamOptions {
  int beam_width = 4;
  int max_symbols_per_frame = 10;
};

// Returns at most beam_width hypotheses, best first. Equal label sequences are
// merged by log-sum; equal scores are ordered by the lexicographically smaller
// label sequence.
std::vector<BeamHypothesis> beam_decode(const TransducerScorer &scorer,
                                        const BeamOptions &options = {});

}  // namespace avrnnt::loss

#endif  // AVRNNT_BEAM_SEARCH_H_
