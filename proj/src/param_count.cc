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

#include "avrnnt/param_count.h"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace avrnnt::model {

namespace {

std::string shape(std::initializer_list<int64_t> dims) {
  std::string s;
  for (int64_t d : dims) {
    if (!s.empty()) s += "x";
    s += std::to_string(d);
  }
  return s;
}

double parse_printed(const std::string &p) {
  const double v = std::stod(p.substr(0, p.size() - 1));
  return p.back() == 'M' ? v * 1e6 : v * 1e3;
}

}  // namespace

ParameterTable count_parameters(const ModelConfig &config) {
  config.validate();
  ParameterTable table;
  int b = 0;
  for (const auto &spec : config.video.blocks()) {
    const int64_t kernel = int64_t{27} * spec.in_channels * spec.out_channels;
    table.rows.push_back({"video/block" + std::to_string(b++),
                          shape({3, 3, 3, spec.in_channels, spec.out_channels}), kernel,
                          kernel + 3 * int64_t{spec.out_channels}});
    table.video_total += table.rows.back().total;
  }
  // LSTM direction: kernel (in + rec) x 4H, gate bias 4H, LN gamma/beta 4H each.
  int64_t in = config.input_dim();
  const int64_t eh = config.encoder_units;
  for (int l = 0; l < config.encoder_layers; ++l) {
    const int64_t kernel = (in + eh) * eh * 4 * 2;
    table.rows.push_back({"encoder/rnn" + std::to_string(l), shape({in + eh, eh, 4, 2}), kernel,
                          kernel + 2 * 12 * eh});
    in = 2 * eh;
  }
  in = config.vocab_size;
  const int64_t dh = config.decoder_units;
  const int64_t dp = config.decoder_projection;
  const int64_t rec = dp > 0 ? dp : dh;
  for (int l = 0; l < config.decoder_layers; ++l) {
    const int64_t kernel = (in + rec) * dh * 4 + dh * dp;
    std::string s = shape({in + rec, dh, 4});
    if (dp > 0) s += " + " + shape({dh, dp});
    table.rows.push_back({"decoder/rnn" + std::to_string(l), s, kernel, kernel + 12 * dh});
    in = rec;
  }
  const int64_t enc_out = config.encoder_output_dim();
  const int64_t j = config.joint_dim;
  const int64_t v = config.vocab_size;
  table.rows.push_back({"rnnt/encoder", shape({enc_out, j}), enc_out * j, enc_out * j});
  table.rows.push_back({"rnnt/decoder", shape({rec, j}), rec * j, rec * j});
  table.rows.push_back({"rnnt/output", shape({j, v}), j * v, j * v + v});
  for (const auto &r : table.rows) table.total += r.total;
  return table;
}

std::string format_count(int64_t n) {
  char buf[32];
  if (n >= 1000000) {
    std::snprintf(buf, sizeof buf, "%.1fM", static_cast<double>(n) / 1e6);
  } else {
    std::snprintf(buf, sizeof buf, "%.1fK", static_cast<double>(n) / 1e3);
  }
  return buf;
}

const std::vector<PublishedRow> &published_table() {
  static const std::vector<PublishedRow> rows = {
      {"video/block0", "5.4K"},     {"video/block1", "221.6K"}, {"video/block2", "885.5K"},
      {"video/block3", "3.5M"},     {"video/block4", "7.1M"},   {"encoder/rnn0", "5.8M"},
      {"encoder/rnn1", "6.3M"},     {"encoder/rnn2", "6.3M"},   {"encoder/rnn3", "6.3M"},
      {"encoder/rnn4", "6.3M"},     {"decoder/rnn0", "7.2M"},   {"decoder/rnn1", "11.8M"},
      {"rnnt/encoder", "655.4K"},   {"rnnt/decoder", "409.6K"}, {"rnnt/output", "48.1K"},
      {"Total", "62.9M"},
  };
  return rows;
}

std::vector<RowComparison> compare_with_published(const ParameterTable &table) {
  std::vector<RowComparison> out;
  auto compare = [&out](const std::string &name, int64_t count, const std::string &printed) {
    RowComparison c;
    c.name = name;
    c.count = count;
    c.displayed = format_count(count);
    c.printed = printed;
    const double want = parse_printed(printed);
    c.relative_delta = std::abs(parse_printed(c.displayed) - want) / want;
    c.residual = (static_cast<double>(count) - want) / want;
    c.matches = c.displayed == printed;
    out.push_back(c);
  };
  for (const auto &pub : published_table()) {
    if (pub.name == "Total") {
      compare(pub.name, table.total, pub.printed);
      continue;
    }
    bool found = false;
    for (const auto &row : table.rows) {
      if (row.name == pub.name) {
        compare(pub.name, row.total, pub.printed);
        found = true;
      }
    }
    if (!found) compare(pub.name, 0, pub.printed);
  }
  return out;
}

std::string render_table(const ParameterTable &table, bool with_diff) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %-28s %12s %9s\n", "Name", "Kernel Shape", "Exact",
                "Params");
  os << line;
  for (const auto &r : table.rows) {
    std::snprintf(line, sizeof line, "%-14s %-28s %12lld %9s\n", r.name.c_str(),
                  r.kernel_shape.c_str(), static_cast<long long>(r.total),
                  format_count(r.total).c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "%-14s %-28s %12lld %9s\n", "Total", "",
                static_cast<long long>(table.total), format_count(table.total).c_str());
  os << line;
  std::snprintf(line, sizeof line, "%-14s %-28s %12lld %9s\n", "(video model)", "",
                static_cast<long long>(table.video_total), format_count(table.video_total).c_str());
  os << line;
  if (with_diff) {
    int mismatches = 0;
    os << "\nComparison with the published table:\n";
    for (const auto &c : compare_with_published(table)) {
      std::snprintf(line, sizeof line, "%-14s printed %8s ours %8s  delta %.4f%%  residual %+.3f%%  %s\n",
                    c.name.c_str(), c.printed.c_str(), c.displayed.c_str(),
                    100.0 * c.relative_delta, 100.0 * c.residual, c.matches ? "ok" : "DIFF");
      os << line;
      if (!c.matches) ++mismatches;
    }
    os << mismatches << " diff rows\n";
  }
  return os.str();
}

}  // namespace avrnnt::model
