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

#include <cmath>
#include <random>

#include "avrnnt/error.h"
#include "avrnnt/transducer_loss.h"
#include "doctest.h"
#include "test_util.h"
#include "transducer_oracles.h"

using namespace avrnnt;
using namespace avrnnt::loss;

TEST_CASE("logadd") {
  CHECK(logadd(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logadd(-1000.0, -1000.0) == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
  CHECK(logadd(3.5, kLogZero) == 3.5);
  CHECK(logadd(kLogZero, -2.0) == -2.0);
  CHECK(logadd(kLogZero, kLogZero) == kLogZero);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    CHECK(std::abs(logadd(a, b) - logadd(b, a)) <= 1e-12);
    CHECK(std::abs(logadd(logadd(a, b), c) - logadd(a, logadd(b, c))) <= 1e-12);
  }
}

TEST_CASE("single-frame, no-label lattice") {
  Tensor3 lp(1, 1, 3);
  lp(0, 0, 0) = std::log(0.25);
  lp(0, 0, 1) = std::log(0.5);
  lp(0, 0, 2) = std::log(0.25);
  const auto r = transducer_loss(lp, {}, 0);
  CHECK(r.loss == doctest::Approx(-std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("uniform 2x2 lattice over two symbols") {
  Tensor3 lp(2, 2, 2, std::log(0.5));
  const double oracle = -testing::brute_force_log_likelihood(lp, {1}, 0);
  // Two valid alignments (label in frame 0 or frame 1) of three emissions.
  CHECK(oracle == doctest::Approx(-std::log(2.0 * 0.125)).epsilon(1e-14));
  CHECK(transducer_loss(lp, {1}, 0).loss == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("loss equals brute-force alignment enumeration") {
  std::mt19937_64 rng(7);
  for (int frames = 1; frames <= 4; ++frames) {
    for (int labels = 0; labels <= 3; ++labels) {
      for (int vocab = 2; vocab <= 4; ++vocab) {
        for (int trial = 0; trial < 10; ++trial) {
          const Tensor3 lp = testing::random_lattice(frames, labels, vocab, rng);
          std::uniform_int_distribution<int> sym(1, vocab - 1);
          std::vector<int> y(labels);
          for (auto &v : y) v = sym(rng);
          const auto r = transducer_loss(lp, y, 0);
          CHECK(std::abs(r.loss + testing::brute_force_log_likelihood(lp, y, 0)) < 1e-8);
          CHECK(std::abs(r.lattice.forward_log_likelihood(lp) -
                         r.lattice.backward_log_likelihood()) < 1e-8);
          CHECK(r.lattice.log_alpha(0, 0) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor3 lp = testing::random_lattice(3, 2, 4, rng, /*normalize=*/trial % 2 == 0);
    const std::vector<int> y = {1 + trial % 3, 3};
    const auto r = transducer_loss(lp, y, 0);
    const double h = 1e-5;
    double worst = 0.0;
    for (size_t i = 0; i < lp.data().size(); ++i) {
      const double keep = lp.data()[i];
      lp.data()[i] = keep + h;
      const double up = transducer_loss(lp, y, 0).loss;
      lp.data()[i] = keep - h;
      const double down = transducer_loss(lp, y, 0).loss;
      lp.data()[i] = keep;
      const double fd = (up - down) / (2 * h);
      if (fd == 0.0 && r.grad.data()[i] == 0.0) continue;
      worst = std::max(worst, testing::rel_error(fd, r.grad.data()[i]));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("blank occupancies form a posterior over each frame") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const int frames = 1 + trial % 6, labels = trial % 4;
    const Tensor3 lp = testing::random_lattice(frames, labels, 5, rng);
    std::vector<int> y(labels, 2);
    const auto r = transducer_loss(lp, y, 0);
    for (int t = 0; t < frames; ++t) {
      double occ = 0.0;
      for (int u = 0; u <= labels; ++u) occ += -r.grad(t, u, 0);
      CHECK(occ == doctest::Approx(1.0).epsilon(1e-8));
    }
    for (int u = 0; u < labels; ++u) {
      double occ = 0.0;
      for (int t = 0; t < frames; ++t) occ += -r.grad(t, u, y[u]);
      CHECK(occ == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("loss errors") {
  Tensor3 empty(0, 2, 3);
  try {
    transducer_loss(empty, {1}, 0);
    FAIL("expected ImpossibleAlignment");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kImpossibleAlignment);
  }
  Tensor3 lp(2, 2, 3, std::log(1.0 / 3));
  for (int bad : {0, 3, -1}) {
    try {
      transducer_loss(lp, {bad}, 0);
      FAIL("expected InvalidLabel");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kInvalidLabel);
    }
  }
  CHECK_THROWS_AS(transducer_loss(lp, {1, 2}, 0), Error);
}

TEST_CASE("long lattices stay finite") {
  std::mt19937_64 rng(3);
  const Tensor3 lp = testing::random_lattice(400, 60, 30, rng);
  std::vector<int> y(60);
  for (int u = 0; u < 60; ++u) y[u] = 1 + u % 29;
  const auto r = transducer_loss(lp, y, 0);
  CHECK(std::isfinite(r.loss));
  CHECK(std::abs(r.lattice.forward_log_likelihood(lp) - r.lattice.backward_log_likelihood()) <
        1e-8 * std::abs(r.loss));
}
