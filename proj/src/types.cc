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

#include "avrnnt/types.h"

#include <cmath>
#include <stdexcept>

#include "avrnnt/error.h"

namespace avrnnt {

Rational parse_rational(const std::string &text) {
  if (text.empty()) throw Error(ErrorCode::kConfigError, "empty rational");
  try {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      size_t pos = 0;
      int64_t num = std::stoll(text.substr(0, slash), &pos);
      int64_t den = std::stoll(text.substr(slash + 1));
      if (den == 0) throw Error(ErrorCode::kConfigError, "zero denominator: " + text);
      return Rational{num, den}.normalized();
    }
    if (text.find('.') == std::string::npos) return Rational{std::stoll(text), 1};
    double v = std::stod(text);
    // NTSC-style rates: 23.976, 29.97, 59.94 -> n*1000/1001.
    double n = std::round(v * 1.001);
    if (std::abs(n * 1000.0 / 1001.0 - v) < 1e-3 && std::abs(n - v) > 1e-9) {
      return Rational{static_cast<int64_t>(n) * 1000, 1001}.normalized();
    }
    return Rational{static_cast<int64_t>(std::llround(v * 1000000.0)), 1000000}.normalized();
  } catch (const std::invalid_argument &) {
    throw Error(ErrorCode::kConfigError, "not a rational: " + text);
  } catch (const std::out_of_range &) {
    throw Error(ErrorCode::kConfigError, "rational out of range: " + text);
  }
}

std::string to_string(const Rational &r) {
  if (r.den == 1) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

}  // namespace avrnnt
