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

#include "dpsurvey/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "dpsurvey/errors.hpp"
#include "oracles.hpp"

namespace dpsurvey {
namespace {

MechanismConfig config_for(std::size_t n, double epsilon = 1.0) {
  MechanismConfig c;
  c.n = n;
  c.alpha = 0.1;
  c.beta = 0.5;
  c.epsilon = epsilon;
  c.p0 = 1.0 / 3.0;
  c.p1 = 2.0 / 3.0;
  return c;
}

MechanismTestHooks no_noise() {
  MechanismTestHooks h;
  h.disable_noise = true;
  return h;
}

// Long-double payment straight from the score definition.
double oracle_payment(const MechanismConfig& c, Report own, double b_bar) {
  if (own == Report::Abstain) return 0.0;
  const int bit = own == Report::One ? 1 : 0;
  const long double peer = std::clamp<long double>((b_bar - bit) / (c.n - 1.0L), 0.0L, 1.0L);
  const auto params = oracle::params_ld(c.p0, c.p1, c.alpha, c.beta);
  return static_cast<double>(oracle::scaled_ld(params, peer, bit ? c.p1 : c.p0));
}

std::vector<Report> mixed_reports(std::size_t ones, std::size_t zeros, std::size_t abstain = 0) {
  std::vector<Report> r(ones, Report::One);
  r.insert(r.end(), zeros, Report::Zero);
  r.insert(r.end(), abstain, Report::Abstain);
  return r;
}

TEST(MechanismTest, AllAbstain) {
  const MechanismConfig c = config_for(10);
  Rng rng = make_rng(1, 0);
  const MechanismOutcome out = run_with_test_hooks(c, mixed_reports(0, 0, 10), rng, no_noise());
  EXPECT_EQ(out.estimate, 0.0);
  for (double p : out.payments) EXPECT_EQ(p, 0.0);
}

TEST(MechanismTest, SixtyFortyWithoutNoise) {
  const MechanismConfig c = config_for(100);
  Rng rng = make_rng(1, 0);
  const MechanismOutcome out = run_with_test_hooks(c, mixed_reports(60, 40), rng, no_noise());
  EXPECT_EQ(out.estimate, 0.6);
  EXPECT_EQ(out.b_bar, 60.0);
  const ScoringParams s = c.scoring();
  EXPECT_EQ(out.payments[0], scaled_score(s, 59.0 / 99.0, c.p1));
  EXPECT_EQ(out.payments[99], scaled_score(s, 60.0 / 99.0, c.p0));
  EXPECT_NEAR(out.payments[0], oracle_payment(c, Report::One, 60.0), 1e-12);
  EXPECT_NEAR(out.payments[99], oracle_payment(c, Report::Zero, 60.0), 1e-12);
}

TEST(MechanismTest, AllOne) {
  const MechanismConfig c = config_for(20);
  Rng rng = make_rng(1, 0);
  const MechanismOutcome out = run_with_test_hooks(c, mixed_reports(20, 0), rng, no_noise());
  EXPECT_EQ(out.estimate, 1.0);
  for (double p : out.payments) EXPECT_EQ(p, out.payments[0]);
}

TEST(MechanismTest, ConsumesOneDraw) {
  const MechanismConfig c = config_for(30);
  Rng a = make_rng(4, 4);
  Rng b = make_rng(4, 4);
  run(c, mixed_reports(10, 15, 5), a);
  b();
  EXPECT_EQ(a(), b());
}

TEST(MechanismTest, PaymentsMatchOracle) {
  const MechanismConfig c = config_for(25, 0.3);
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng = make_rng(11, t);
    const auto reports = mixed_reports(t % 13, 25 - t % 13 - t % 5, t % 5);
    const MechanismOutcome out = run(c, reports, rng);
    for (std::size_t i = 0; i < c.n; ++i) {
      EXPECT_NEAR(out.payments[i], oracle_payment(c, reports[i], out.b_bar), 1e-12);
    }
  }
}

TEST(MechanismTest, BillboardBitExact) {
  const MechanismConfig c = config_for(40, 0.5);
  const ScoringParams s = c.scoring();
  for (std::uint64_t t = 0; t < 100; ++t) {
    Rng rng = make_rng(12, t);
    const auto reports = mixed_reports(t % 30, 40 - t % 30 - 3, 3);
    const MechanismOutcome out = run(c, reports, rng);
    for (std::size_t i = 0; i < c.n; ++i) {
      ASSERT_EQ(out.payments[i], billboard_payment(s, reports[i], out.b_bar, c.n, false));
    }
  }
}

TEST(MechanismTest, Anonymity) {
  const MechanismConfig c = config_for(12, 0.7);
  std::vector<Report> reports = mixed_reports(5, 4, 3);
  Rng rng_a = make_rng(5, 1);
  const MechanismOutcome a = run(c, reports, rng_a);
  std::vector<std::size_t> perm(c.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 4, perm.end());
  std::vector<Report> permuted(c.n);
  for (std::size_t k = 0; k < c.n; ++k) permuted[k] = reports[perm[k]];
  Rng rng_b = make_rng(5, 1);
  const MechanismOutcome b = run(c, permuted, rng_b);
  EXPECT_EQ(a.estimate, b.estimate);
  for (std::size_t k = 0; k < c.n; ++k) EXPECT_EQ(b.payments[k], a.payments[perm[k]]);
}

TEST(MechanismTest, AccuracyDecomposition) {
  // Truthful reports: |p_hat - p~| <= |noise| / n.
  const MechanismConfig c = config_for(50, 0.2);
  Population pop;
  for (std::size_t j = 0; j < c.n; ++j) pop.agents.push_back(AgentType{j % 3 == 0 ? 1 : 0, 0.1});
  std::vector<Report> reports;
  for (const auto& a : pop.agents) reports.push_back(report_of_bit(a.bit));
  const double p_hat = true_statistic(pop);
  for (std::uint64_t t = 0; t < 500; ++t) {
    Rng rng = make_rng(13, t);
    const MechanismOutcome out = run(c, reports, rng);
    EXPECT_GE(out.estimate, 0.0);
    EXPECT_LE(out.estimate, 1.0);
    EXPECT_LE(std::fabs(p_hat - out.estimate), std::fabs(out.noise_draw) / c.n + 1e-15);
  }
}

TEST(MechanismTest, OneReportMovesEstimateByAtMostOneOverN) {
  const MechanismConfig c = config_for(30);
  for (double forced_noise : {-40.0, -2.5, 0.0, 0.3, 7.0, 50.0}) {
    for (std::size_t ones = 0; ones < 30; ++ones) {
      auto lo = mixed_reports(ones, 30 - ones);
      auto hi = lo;
      hi[ones] = Report::One;
      MechanismTestHooks h;
      Rng rng = make_rng(0, 0);
      h.forced_b_bar = static_cast<double>(ones) + forced_noise;
      const double e_lo = run_with_test_hooks(c, lo, rng, h).estimate;
      h.forced_b_bar = static_cast<double>(ones + 1) + forced_noise;
      const double e_hi = run_with_test_hooks(c, hi, rng, h).estimate;
      EXPECT_GE(e_hi, e_lo);
      EXPECT_LE(e_hi - e_lo, 1.0 / 30 + 1e-15);
    }
  }
}

TEST(MechanismTest, ClampedPaymentsAreNonnegative) {
  MechanismConfig c = config_for(10, 0.5);
  c.clamp_payments = true;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng = make_rng(14, t);
    for (double p : run(c, mixed_reports(2, 8), rng).payments) EXPECT_GE(p, 0.0);
  }
  // Default payments go negative on a lie against a lopsided population.
  MechanismConfig raw = config_for(10);
  Rng rng = make_rng(0, 0);
  const MechanismOutcome out = run_with_test_hooks(raw, mixed_reports(9, 1), rng, no_noise());
  EXPECT_LT(out.payments[9], 0.0);
}

TEST(MechanismTest, LengthMismatchThrows) {
  const MechanismConfig c = config_for(5);
  Rng rng = make_rng(0, 0);
  EXPECT_THROW(run(c, mixed_reports(2, 2), rng), PreconditionError);
  EXPECT_THROW(run(c, mixed_reports(3, 3), rng), PreconditionError);
}

TEST(MechanismTest, ConfigValidation) {
  MechanismConfig c = config_for(5);
  c.n = 1;
  EXPECT_THROW(c.validate(), PreconditionError);
  c = config_for(5);
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), PreconditionError);
  c = config_for(5);
  c.p0 = c.p1 = 0.5;
  EXPECT_THROW(c.validate(), DegeneratePriorError);
}

TEST(ObservableViewTest, DropsOwnPayment) {
  MechanismOutcome out;
  out.estimate = 0.25;
  out.payments = {1.0, 2.0, 3.0};
  const ObservableView v = observable_view(out, 1);
  EXPECT_EQ(v.estimate, 0.25);
  EXPECT_EQ(v.other_payments, (std::vector<double>{1.0, 3.0}));
  EXPECT_THROW(observable_view(out, 3), PreconditionError);
}

TEST(TrueStatisticTest, Examples) {
  Population pop;
  pop.agents = {AgentType{1, 0.0}, AgentType{0, 0.0}, AgentType{1, 0.0}, AgentType{1, 0.0}};
  EXPECT_EQ(true_statistic(pop), 0.75);
  EXPECT_THROW(true_statistic(Population{}), PreconditionError);
}

TEST(ReportedSumTest, AbstainCountsZero) {
  EXPECT_EQ(reported_sum(mixed_reports(3, 4, 5)), 3);
  EXPECT_EQ(reported_sum(std::vector<Report>{}), 0);
}

}  // namespace
}  // namespace dpsurvey
