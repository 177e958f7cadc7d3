//
// Copyright 2026 The dpsurvey Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpsurvey/scoring.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "dpsurvey/errors.hpp"
#include "oracles.hpp"

namespace dpsurvey {
namespace {

constexpr double kMaxUlps = 4.0;

std::vector<double> unit_grid(int steps) {
  std::vector<double> g;
  for (int k = 0; k <= steps; ++k) g.push_back(static_cast<double>(k) / steps);
  return g;
}

const std::vector<ScoringParams>& sample_params() {
  static const std::vector<ScoringParams> params = {
      scoring_params(0.3, 0.7, 0.1, 1.0),
      scoring_params(1.0 / 3.0, 2.0 / 3.0, 0.1, 0.0923),
      scoring_params(0.8, 0.15, 0.2, 3.5),
      scoring_params(0.05, 0.95, 0.0, 0.01),
  };
  return params;
}

TEST(BasicBrierTest, Examples) {
  EXPECT_EQ(basic_brier(1, 1.0), 1.0);
  EXPECT_EQ(basic_brier(1, 0.0), -1.0);
  EXPECT_EQ(basic_brier(1, 0.5), 0.5);
  EXPECT_EQ(basic_brier(0, 0.0), 1.0);
}

TEST(BasicBrierTest, RejectsOutOfRange) {
  EXPECT_THROW(basic_brier(1, -0.01), PreconditionError);
  EXPECT_THROW(basic_brier(1, 1.01), PreconditionError);
  EXPECT_THROW(basic_brier(2, 0.5), PreconditionError);
  EXPECT_THROW(basic_brier(0, std::nan("")), PreconditionError);
}

TEST(BScoreTest, Examples) {
  EXPECT_DOUBLE_EQ(b_score(0.5, 0.5), 0.5);
  // Truthful and lying payments at p0 = 0.3, p1 = 0.7 with c = 0.
  EXPECT_NEAR(b_score(0.3, 0.3), 0.5 + 0.5 * 0.4 * 0.4, 1e-15);
  EXPECT_NEAR(b_score(0.3, 0.7), 0.5 - 1.5 * 0.4 * 0.4, 1e-15);
  EXPECT_NEAR(b_score(0.3, 0.3), 0.58, 1e-15);
  EXPECT_NEAR(b_score(0.3, 0.7), 0.26, 1e-15);
}

TEST(BScoreTest, MatchesLongDoubleOracle) {
  for (double p : unit_grid(100)) {
    for (double q : unit_grid(100)) {
      const double ref = static_cast<double>(oracle::brier_ld(p, q));
      EXPECT_LE(oracle::scaled_ulps(b_score(p, q), ref, oracle::brier_scale(p, q)), kMaxUlps);
    }
  }
}

TEST(ScoringParamsTest, WorkedExample) {
  const ScoringParams s = scoring_params(0.3, 0.7, 0.1, 1.0);
  EXPECT_NEAR(s.c, 0.0, 1e-16);
  EXPECT_NEAR(s.d, 0.34, 1e-15);
  EXPECT_NEAR(s.rho, 6.25, 1e-13);
  EXPECT_NEAR(scaled_score(s, 0.7, 0.7), 1.5, 1e-13);
  EXPECT_NEAR(scaled_score(s, 0.7, 0.3), -0.5, 1e-13);
  // beta + 2 rho alpha |p0 - p1|
  EXPECT_NEAR(scaled_score(s, 0.7, 0.7), s.beta + 2 * s.rho * s.alpha * 0.4, 1e-13);
}

TEST(ScoringParamsTest, AlphaZeroLimit) {
  const double beta = 0.7;
  const ScoringParams s = scoring_params(0.3, 0.7, 0.0, beta);
  EXPECT_NEAR(s.rho, 3.125 * beta, 1e-13);
  const ScoringParams tiny = scoring_params(0.3, 0.7, 1e-12, beta);
  EXPECT_NEAR(tiny.rho, 3.125 * beta, 1e-9);
}

TEST(ScoringParamsTest, RecomputableBitExact) {
  for (const auto& s : sample_params()) {
    const ScoringParams again = scoring_params(s.p0, s.p1, s.alpha, s.beta);
    EXPECT_EQ(again.c, s.c);
    EXPECT_EQ(again.d, s.d);
    EXPECT_EQ(again.rho, s.rho);
    EXPECT_GT(s.rho, 0.0);
    EXPECT_EQ(s.c, (s.p0 + s.p1 - 1) / 2);
  }
}

TEST(ScoringParamsTest, MatchesLongDoubleOracle) {
  for (const auto& s : sample_params()) {
    const auto ref = oracle::params_ld(s.p0, s.p1, s.alpha, s.beta);
    EXPECT_NEAR(s.c, static_cast<double>(ref.c), 1e-15);
    EXPECT_NEAR(s.d, static_cast<double>(ref.d), 1e-15);
    EXPECT_NEAR(s.rho / static_cast<double>(ref.rho), 1.0, 1e-14);
  }
}

TEST(ScoringParamsTest, RejectsBadInputs) {
  EXPECT_THROW(scoring_params(0.5, 0.5, 0.1, 1.0), DegeneratePriorError);
  EXPECT_THROW(scoring_params(0.3, 0.7, 0.2, 1.0), PreconditionError);  // alpha = gap / 2
  EXPECT_THROW(scoring_params(0.3, 0.7, 0.25, 1.0), PreconditionError);
  EXPECT_THROW(scoring_params(0.3, 0.7, -0.01, 1.0), PreconditionError);
  EXPECT_THROW(scoring_params(0.3, 0.7, 0.1, 0.0), PreconditionError);
  EXPECT_THROW(scoring_params(0.3, 1.2, 0.1, 1.0), PreconditionError);
}

TEST(ScoringIdentityTest, ExpectationIdentity) {
  double worst = 0.0;
  for (double p : unit_grid(100)) {
    for (double q : unit_grid(100)) {
      const double a = p * basic_brier(1, q);
      const double b = (1 - p) * basic_brier(0, q);
      const double scale = std::max(std::fabs(a) + std::fabs(b) + 2 + 2 * q * q, oracle::brier_scale(p, q));
      worst = std::max(worst, oracle::scaled_ulps(a + b, b_score(p, q), scale));
    }
  }
  EXPECT_LE(worst, kMaxUlps);
}

TEST(ScoringIdentityTest, GapIdentity) {
  for (const auto& s : sample_params()) {
    double worst = 0.0;
    for (double p : unit_grid(100)) {
      for (double q : unit_grid(100)) {
        const double lhs = scaled_score(s, p, p) - scaled_score(s, p, q);
        const double rhs = 2 * s.rho * (p - q) * (p - q);
        const double scale = std::max(oracle::scaled_scale(s.c, s.d, s.rho, p, p),
                                      oracle::scaled_scale(s.c, s.d, s.rho, p, q));
        worst = std::max(worst, oracle::scaled_ulps(lhs, rhs, scale));
      }
    }
    EXPECT_LE(worst, kMaxUlps) << "rho=" << s.rho;
  }
}

TEST(ScoringIdentityTest, LipschitzIdentity) {
  const auto grid = unit_grid(100);
  for (const auto& s : sample_params()) {
    double worst = 0.0;
    for (double q : grid) {
      const double lambda = lipschitz_constant(s, q);
      EXPECT_EQ(lambda, std::fabs(s.rho * (2 - 4 * (q - s.c))));
      for (double p : grid) {
        for (std::size_t k = 0; k < grid.size(); k += 7) {
          const double pp = grid[k];
          const double lhs = std::fabs(scaled_score(s, p, q) - scaled_score(s, pp, q));
          const double rhs = lambda * std::fabs(p - pp);
          const double scale = std::max(oracle::scaled_scale(s.c, s.d, s.rho, p, q),
                                        oracle::scaled_scale(s.c, s.d, s.rho, pp, q));
          worst = std::max(worst, oracle::scaled_ulps(lhs, rhs, scale));
        }
      }
    }
    EXPECT_LE(worst, kMaxUlps) << "rho=" << s.rho;
  }
}

TEST(ScoringPropertyTest, UniqueMaximizerAtTruth) {
  for (const auto& s : sample_params()) {
    for (double p : unit_grid(100)) {
      const double best = scaled_score(s, p, p);
      for (double q : unit_grid(100)) {
        if (q == p) continue;
        EXPECT_GT(best, scaled_score(s, p, q)) << "p=" << p << " q=" << q;
      }
    }
  }
}

TEST(ScoringPropertyTest, Symmetry) {
  for (double t : unit_grid(100)) {
    for (double u : unit_grid(100)) {
      const double ts = t - 0.5;
      const double us = u - 0.5;
      EXPECT_NEAR(b_score(0.5 + ts, 0.5 + us), b_score(0.5 - ts, 0.5 - us), 1e-14);
    }
  }
}

TEST(ScoringPropertyTest, InequalitiesOnRandomTuples) {
  std::mt19937_64 gen(20261016);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int tuples = 0;
  while (tuples < 200) {
    const double p0 = unit(gen);
    const double p1 = unit(gen);
    const double gap = std::fabs(p1 - p0);
    if (gap < 0.02) continue;
    const double alpha = unit(gen) * gap / 2 * 0.999;
    const double beta = 0.01 + 10 * unit(gen);
    const double alpha_dev = 0.5 * unit(gen);
    const ScoringParams s = scoring_params(p0, p1, alpha, beta);
    ++tuples;
    for (int bit = 0; bit <= 1; ++bit) {
      const double pb = s.prediction(bit);
      const double other = s.prediction(1 - bit);
      for (int k = 1; k < 100; ++k) {
        // Strictly inside (pb - alpha, pb + alpha).
        const double pp = pb - alpha + 2 * alpha * k / 100.0;
        EXPECT_LE(scaled_score(s, pp, other), 1e-9);
        EXPECT_GE(scaled_score(s, pp, pb), beta - 1e-9);
        const double pd = pb - alpha_dev + 2 * alpha_dev * k / 100.0;
        EXPECT_LE(scaled_score(s, pd, pb), beta + 2 * s.rho * (alpha + alpha_dev) * gap + 1e-9);
      }
    }
  }
}

}  // namespace
}  // namespace dpsurvey
