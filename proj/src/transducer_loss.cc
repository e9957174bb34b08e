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

#include "avrnnt/transducer_loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "avrnnt/error.h"

namespace avrnnt::loss {

double logadd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

Vector log_softmax(const Vector &logits) {
  const double max = logits.maxCoeff();
  const double lse = max + std::log((logits.array() - max).exp().sum());
  return logits.array() - lse;
}

double LossLattice::forward_log_likelihood(const Tensor3 &log_probs) const {
  const auto t_last = log_alpha.rows() - 1;
  const auto u_last = log_alpha.cols() - 1;
  return log_alpha(t_last, u_last) + log_probs(t_last, u_last, blank);
}

namespace {

void validate(const Tensor3 &log_probs, const std::vector<int> &labels, int blank) {
  const int64_t num_labels = static_cast<int64_t>(labels.size());
  if (log_probs.dim0() == 0) {
    throw Error(ErrorCode::kImpossibleAlignment,
                "no input frames for " + std::to_string(num_labels) + " labels");
  }
  if (log_probs.dim1() != num_labels + 1) {
    throw Error(ErrorCode::kShapeError, "lattice has " + std::to_string(log_probs.dim1()) +
                                            " label positions, expected " +
                                            std::to_string(num_labels + 1));
  }
  const int64_t vocab = log_probs.dim2();
  if (blank < 0 || blank >= vocab) {
    throw Error(ErrorCode::kInvalidLabel, "blank index out of range");
  }
  for (int y : labels) {
    if (y < 0 || y >= vocab || y == blank) {
      throw Error(ErrorCode::kInvalidLabel, "label " + std::to_string(y) + " invalid for vocab " +
                                                std::to_string(vocab));
    }
  }
}

}  // namespace

LossLattice compute_lattice(const Tensor3 &log_probs, const std::vector<int> &labels, int blank) {
  validate(log_probs, labels, blank);
  const int64_t frames = log_probs.dim0();
  const int64_t positions = log_probs.dim1();
  LossLattice lat;
  lat.blank = blank;
  lat.log_alpha = Matrix::Constant(frames, positions, kLogZero);
  lat.log_beta = Matrix::Constant(frames, positions, kLogZero);

  auto &alpha = lat.log_alpha;
  for (int64_t t = 0; t < frames; ++t) {
    for (int64_t u = 0; u < positions; ++u) {
      if (t == 0 && u == 0) {
        alpha(0, 0) = 0.0;
        continue;
      }
      double a = kLogZero;
      if (t > 0) a = alpha(t - 1, u) + log_probs(t - 1, u, blank);
      if (u > 0) a = logadd(a, alpha(t, u - 1) + log_probs(t, u - 1, labels[u - 1]));
      alpha(t, u) = a;
    }
  }

  auto &beta = lat.log_beta;
  for (int64_t t = frames - 1; t >= 0; --t) {
    for (int64_t u = positions - 1; u >= 0; --u) {
      if (t == frames - 1 && u == positions - 1) {
        beta(t, u) = log_probs(t, u, blank);
        continue;
      }
      double b = kLogZero;
      if (t < frames - 1) b = beta(t + 1, u) + log_probs(t, u, blank);
      if (u < positions - 1) b = logadd(b, beta(t, u + 1) + log_probs(t, u, labels[u]));
      beta(t, u) = b;
    }
  }
  return lat;
}

TransducerLoss transducer_loss(const Tensor3 &log_probs, const std::vector<int> &labels,
                               int blank) {
  TransducerLoss out;
  out.lattice = compute_lattice(log_probs, labels, blank);
  const auto &alpha = out.lattice.log_alpha;
  const auto &beta = out.lattice.log_beta;
  const double log_like = beta(0, 0);
  out.loss = -log_like;
  out.grad = Tensor3(log_probs.dim0(), log_probs.dim1(), log_probs.dim2(), 0.0);

  const int64_t frames = log_probs.dim0();
  const int64_t positions = log_probs.dim1();
  for (int64_t t = 0; t < frames; ++t) {
    for (int64_t u = 0; u < positions; ++u) {
      const double next_blank = t + 1 < frames ? beta(t + 1, u)
                                : u + 1 == positions ? 0.0
                                                     : kLogZero;
      if (next_blank != kLogZero) {
        out.grad(t, u, blank) =
            -std::exp(alpha(t, u) + log_probs(t, u, blank) + next_blank - log_like);
      }
      if (u + 1 < positions) {
        const int y = labels[u];
        out.grad(t, u, y) =
            -std::exp(alpha(t, u) + log_probs(t, u, y) + beta(t, u + 1) - log_like);
      }
    }
  }
  return out;
}

}  // namespace avrnnt::loss
