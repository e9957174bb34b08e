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

// Per-component parameter ledger for the audio-visual RNN-T, compared with
// the published architecture table at its printed precision.

#ifndef AVRNNT_PARAM_COUNT_H_
#define AVRNNT_PARAM_COUNT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "avrnnt/rnnt_model.h"

namespace avrnnt::model {

struct ParameterRow {
  std::string name;
  std::string kernel_shape;
  int64_t kernel = 0;  // main kernel only
  int64_t total = 0;   // kernel + biases + normalization affine terms
};

struct ParameterTable {
  std::vector<ParameterRow> rows;
  int64_t total = 0;
  int64_t video_total = 0;
};

ParameterTable count_parameters(const ModelConfig &config);

// 5376 -> "5.4K", 62918987 -> "62.9M" (one decimal, K below a million).
std::string format_count(int64_t n);

struct PublishedRow {
  std::string name;
  std::string printed;
};

// The published per-row values for the full-scale model, plus "Total".
const std::vector<PublishedRow> &published_table();

struct RowComparison {
  std::string name;
  int64_t count = 0;
  std::string displayed;
  std::string printed;
  // |displayed value - printed value| / printed value, at printed precision.
  double relative_delta = 0.0;
  // (count - printed value) / printed value: the rounding residual.
  double residual = 0.0;
  bool matches = false;
};

std::vector<RowComparison> compare_with_published(const ParameterTable &table);

std::string render_table(const ParameterTable &table, bool with_diff);

}  // namespace avrnnt::model

#endif  // AVRNNT_PARAM_COUNT_H_
