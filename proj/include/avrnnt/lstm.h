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

#ifndef AVRNNT_LSTM_H_
#define AVRNNT_LSTM_H_

#include <vector>

#include "avrnnt/types.h"

namespace avrnnt::model {

inline constexpr double kLayerNormEpsilon = 1e-6;

// Weights of one layer-normalized LSTM direction. Gate blocks are ordered
// input, forget, cell, output; each 4H pre-activation block is normalized
// on its own before the learned affine. With a projection the recurrent
// input is the projected output r = h * projection.
struct LnLstmWeights {
  Matrix kernel;      // (input_dim + recurrent_dim) x 4H
  Matrix bias;        // 1 x 4H
  Matrix ln_gamma;    // 1 x 4H
  Matrix ln_beta;     // 1 x 4H
  Matrix projection;  // H x P, or empty

  int hidden() const { return static_cast<int>(bias.cols() / 4); }
  int output_dim() const {
    return projection.size() ? static_cast<int>(projection.cols()) : hidden();
  }
  int input_dim() const { return static_cast<int>(kernel.rows()) - output_dim(); }
};

LnLstmWeights zero_lstm_weights(int input_dim, int hidden, int projection = 0);

struct LstmState {
  RowVector h;  // recurrent output (projected when the layer has a projection)
  RowVector c;
};

LstmState zero_state(const LnLstmWeights &w);

struct LstmStepCache {
  RowVector normalized;  // pre-affine LN output, 4H
  RowVector inv_std;     // 4 entries
  RowVector gates;       // post-activation i, f, g, o
  RowVector c_prev, c, tanh_c, h_raw, r_prev;
};

// One step given the precomputed input contribution x * W_x.
LstmState lnlstm_step_projected(const RowVector &input_projection, const LstmState &state,
                                const LnLstmWeights &w, LstmStepCache *cache = nullptr);

// One step on a raw input vector.
LstmState lnlstm_step(const RowVector &x, const LstmState &state, const LnLstmWeights &w);

struct LstmSequenceCache {
  Matrix inputs;
  std::vector<LstmStepCache> steps;
  bool reversed = false;
};

// Runs over the rows of x (last to first when reversed) from a zero state and
// returns the per-row outputs in the original row order. With rowwise set,
// each input row is projected separately so results match lnlstm_step
// bit-for-bit.
Matrix lnlstm_sequence(const Matrix &x, const LnLstmWeights &w, bool reversed,
                       LstmSequenceCache *cache = nullptr, bool rowwise = false);

// Backpropagates d loss / d outputs; accumulates into grads and returns
// d loss / d inputs.
Matrix lnlstm_sequence_backward(const Matrix &grad_out, const LnLstmWeights &w,
                                const LstmSequenceCache &cache, LnLstmWeights &grads);

}  // namespace avrnnt::model

#endif  // AVRNNT_LSTM_H_
