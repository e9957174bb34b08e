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

#ifndef AVRNNT_TYPES_H_
#define AVRNNT_TYPES_H_

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace avrnnt {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Dense 3-D array, last index fastest (e.g. T x (U+1) x V lattices).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int64_t d0, int64_t d1, int64_t d2, double fill = 0.0)
      : d0_(d0), d1_(d1), d2_(d2), data_(static_cast<size_t>(d0 * d1 * d2), fill) {}

  int64_t dim0() const { return d0_; }
  int64_t dim1() const { return d1_; }
  int64_t dim2() const { return d2_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }

  double &operator()(int64_t i, int64_t j, int64_t k) { return data_[(i * d1_ + j) * d2_ + k]; }
  double operator()(int64_t i, int64_t j, int64_t k) const {
    return data_[(i * d1_ + j) * d2_ + k];
  }
  double *row(int64_t i, int64_t j) { return data_.data() + (i * d1_ + j) * d2_; }
  const double *row(int64_t i, int64_t j) const { return data_.data() + (i * d1_ + j) * d2_; }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

 private:
  int64_t d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<double> data_;
};

// Exact rational number used for video frame rates (e.g. 30000/1001).
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  Rational normalized() const {
    int64_t g = std::gcd(num, den);
    if (g == 0) return {0, 1};
    Rational r{num / g, den / g};
    if (r.den < 0) r = {-r.num, -r.den};
    return r;
  }

  friend bool operator==(const Rational &a, const Rational &b) {
    return a.num * b.den == b.num * a.den;
  }
};

// Parses "30", "25/1", "30000/1001" or "29.97" (decimal, mapped to the exact
// NTSC rational when it is within 1e-3 of n*1000/1001).
Rational parse_rational(const std::string &text);
std::string to_string(const Rational &r);

}  // namespace avrnnt

#endif  // AVRNNT_TYPES_H_
