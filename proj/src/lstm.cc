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

#include "avrnnt/lstm.h"

#include <cmath>
#include <string>

#include "avrnnt/error.h"

namespace avrnnt::model {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LnLstmWeights zero_lstm_weights(int input_dim, int hidden, int projection) {
  LnLstmWeights w;
  const int recurrent = projection > 0 ? projection : hidden;
  w.kernel = Matrix::Zero(input_dim + recurrent, 4 * hidden);
  w.bias = Matrix::Zero(1, 4 * hidden);
  w.ln_gamma = Matrix::Zero(1, 4 * hidden);
  w.ln_beta = Matrix::Zero(1, 4 * hidden);
  if (projection > 0) w.projection = Matrix::Zero(hidden, projection);
  return w;
}

LstmState zero_state(const LnLstmWeights &w) {
  return {RowVector::Zero(w.output_dim()), RowVector::Zero(w.hidden())};
}

LstmState lnlstm_step_projected(const RowVector &input_projection, const LstmState &state,
                                const LnLstmWeights &w, LstmStepCache *cache) {
  const int hidden = w.hidden();
  const int rec = w.output_dim();
  if (input_projection.size() != 4 * hidden || state.h.size() != rec ||
      state.c.size() != hidden) {
    throw Error(ErrorCode::kShapeError, "LSTM step dimensions disagree with weights");
  }
  RowVector z = input_projection + state.h * w.kernel.bottomRows(rec) + w.bias.row(0);

  RowVector normalized(4 * hidden);
  RowVector inv_std(4);
  RowVector gates(4 * hidden);
  for (int k = 0; k < 4; ++k) {
    auto zk = z.segment(k * hidden, hidden).array();
    const double mean = zk.mean();
    const double var = (zk - mean).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    inv_std(k) = inv;
    normalized.segment(k * hidden, hidden) = (zk - mean) * inv;
  }
  RowVector act = normalized.array() * w.ln_gamma.row(0).array() + w.ln_beta.row(0).array();
  for (int j = 0; j < 4 * hidden; ++j) {
    gates(j) = (j >= 2 * hidden && j < 3 * hidden) ? std::tanh(act(j)) : sigmoid(act(j));
  }
  auto i = gates.segment(0, hidden).array();
  auto f = gates.segment(hidden, hidden).array();
  auto g = gates.segment(2 * hidden, hidden).array();
  auto o = gates.segment(3 * hidden, hidden).array();

  LstmState next;
  next.c = f * state.c.array() + i * g;
  RowVector tanh_c = next.c.array().tanh();
  RowVector h_raw = o * tanh_c.array();
  next.h = w.projection.size() ? RowVector(h_raw * w.projection) : h_raw;

  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
    cache->gates = std::move(gates);
    cache->c_prev = state.c;
    cache->c = next.c;
    cache->tanh_c = std::move(tanh_c);
    cache->h_raw = std::move(h_raw);
    cache->r_prev = state.h;
  }
  return next;
}

LstmState lnlstm_step(const RowVector &x, const LstmState &state, const LnLstmWeights &w) {
  if (x.size() != w.input_dim()) {
    throw Error(ErrorCode::kShapeError, "LSTM input has width " + std::to_string(x.size()) +
                                            ", expected " + std::to_string(w.input_dim()));
  }
  RowVector proj = x * w.kernel.topRows(w.input_dim());
  return lnlstm_step_projected(proj, state, w);
}

Matrix lnlstm_sequence(const Matrix &x, const LnLstmWeights &w, bool reversed,
                       LstmSequenceCache *cache, bool rowwise) {
  if (x.cols() != w.input_dim()) {
    throw Error(ErrorCode::kShapeError, "LSTM input has width " + std::to_string(x.cols()) +
                                            ", expected " + std::to_string(w.input_dim()));
  }
  const Eigen::Index n = x.rows();
  Matrix ordered = reversed ? Matrix(x.colwise().reverse()) : x;
  const auto wx = w.kernel.topRows(w.input_dim());
  Matrix projected(n, 4 * w.hidden());
  if (rowwise) {
    for (Eigen::Index s = 0; s < n; ++s) projected.row(s) = RowVector(ordered.row(s)) * wx;
  } else {
    projected.noalias() = ordered * wx;
  }

  Matrix out(n, w.output_dim());
  if (cache) {
    cache->reversed = reversed;
    cache->steps.assign(n, LstmStepCache{});
  }
  LstmState state = zero_state(w);
  for (Eigen::Index s = 0; s < n; ++s) {
    state = lnlstm_step_projected(projected.row(s), state, w, cache ? &cache->steps[s] : nullptr);
    out.row(reversed ? n - 1 - s : s) = state.h;
  }
  if (cache) cache->inputs = std::move(ordered);
  return out;
}

Matrix lnlstm_sequence_backward(const Matrix &grad_out, const LnLstmWeights &w,
                                const LstmSequenceCache &cache, LnLstmWeights &grads) {
  const Eigen::Index n = static_cast<Eigen::Index>(cache.steps.size());
  const int hidden = w.hidden();
  const int rec = w.output_dim();
  const int in = w.input_dim();
  const auto wr = w.kernel.bottomRows(rec);

  Matrix dz_all(n, 4 * hidden);
  Matrix r_prev_all(n, rec);
  RowVector dr_rec = RowVector::Zero(rec);
  RowVector dc_next = RowVector::Zero(hidden);
  for (Eigen::Index s = n - 1; s >= 0; --s) {
    const LstmStepCache &st = cache.steps[s];
    const Eigen::Index t = cache.reversed ? n - 1 - s : s;
    RowVector dr = grad_out.row(t) + dr_rec;
    RowVector dh;
    if (w.projection.size()) {
      grads.projection.noalias() += st.h_raw.transpose() * dr;
      dh = dr * w.projection.transpose();
    } else {
      dh = dr;
    }
    auto i = st.gates.segment(0, hidden).array();
    auto f = st.gates.segment(hidden, hidden).array();
    auto g = st.gates.segment(2 * hidden, hidden).array();
    auto o = st.gates.segment(3 * hidden, hidden).array();
    auto tc = st.tanh_c.array();

    RowVector dc = dc_next.array() + dh.array() * o * (1.0 - tc.square());
    RowVector da(4 * hidden);
    da.segment(0, hidden) = dc.array() * g * i * (1.0 - i);
    da.segment(hidden, hidden) = dc.array() * st.c_prev.array() * f * (1.0 - f);
    da.segment(2 * hidden, hidden) = dc.array() * i * (1.0 - g.square());
    da.segment(3 * hidden, hidden) = dh.array() * tc * o * (1.0 - o);
    dc_next = dc.array() * f;

    grads.ln_gamma.row(0) += (da.array() * st.normalized.array()).matrix();
    grads.ln_beta.row(0) += da;
    RowVector dn = da.array() * w.ln_gamma.row(0).array();
    RowVector dz(4 * hidden);
    for (int k = 0; k < 4; ++k) {
      auto dnk = dn.segment(k * hidden, hidden).array();
      auto nk = st.normalized.segment(k * hidden, hidden).array();
      dz.segment(k * hidden, hidden) =
          st.inv_std(k) * (dnk - dnk.mean() - nk * (dnk * nk).mean());
    }
    grads.bias.row(0) += dz;
    dz_all.row(s) = dz;
    r_prev_all.row(s) = st.r_prev;
    dr_rec = dz * wr.transpose();
  }
  grads.kernel.topRows(in).noalias() += cache.inputs.transpose() * dz_all;
  grads.kernel.bottomRows(rec).noalias() += r_prev_all.transpose() * dz_all;
  Matrix dx_ordered = dz_all * w.kernel.topRows(in).transpose();
  return cache.reversed ? Matrix(dx_ordered.colwise().reverse()) : dx_ordered;
}

}  // namespace avrnnt::model
