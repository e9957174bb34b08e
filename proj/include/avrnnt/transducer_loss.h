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

#ifndef AVRNNT_TRANSDUCER_LOSS_H_
#define AVRNNT_TRANSDUCER_LOSS_H_

#include <limits>
#include <vector>

#include "avrnnt/types.h"

namespace avrnnt::loss {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow or underflow; logadd(x, -inf) == x.
double logadd(double a, double b);

// Row-wise log-softmax over the last axis.
Vector log_softmax(const Vector &logits);

// Forward/backward log-probabilities over the T x (U+1) alignment grid.
struct LossLattice {
  Matrix log_alpha;  // T x (U+1)
  Matrix log_beta;   // T x (U+1)
  int blank = 0;

  double forward_log_likelihood(const Tensor3 &log_probs) const;
  double backward_log_likelihood() const { return log_beta(0, 0); }
};

LossLattice compute_lattice(const Tensor3 &log_probs, const std::vector<int> &labels, int blank);

struct TransducerLoss {
  double loss = 0.0;  // -log P(labels | inputs)
  Tensor3 grad;       // d loss / d log_probs, same shape as log_probs
  LossLattice lattice;
};

// log_probs is T x (U+1) x V log-softmax output of the joint network.
// Gradients are exact, from the alpha * beta transition occupancies.
TransducerLoss transducer_loss(const Tensor3 &log_probs, const std::vector<int> &labels,
                               int blank);

}  // namespace avrnnt::loss

#endif  // AVRNNT_TRANSDUCER_LOSS_H_
