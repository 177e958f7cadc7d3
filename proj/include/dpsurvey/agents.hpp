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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "dpsurvey/mechanism.hpp"
#include "dpsurvey/parallel.hpp"
#include "dpsurvey/priors.hpp"
#include "dpsurvey/report.hpp"

namespace dpsurvey {

enum class OffThreshold { Abstain, Lie, Truth };

// Truthful below or at tau; `off` above it.
struct Threshold {
  double tau = 0.0;
  OffThreshold off = OffThreshold::Abstain;
  bool operator==(const Threshold&) const = default;
};
struct AlwaysTruth {
  bool operator==(const AlwaysTruth&) const = default;
};
struct AlwaysLie {
  bool operator==(const AlwaysLie&) const = default;
};
struct AlwaysAbstain {
  bool operator==(const AlwaysAbstain&) const = default;
};
struct ConstantBit {
  int value = 0;
  bool operator==(const ConstantBit&) const = default;
};

using Strategy = std::variant<Threshold, AlwaysTruth, AlwaysLie, AlwaysAbstain, ConstantBit>;

void validate_strategy(const Strategy& s);
Report apply_strategy(const Strategy& s, const AgentType& agent);

// One strategy shared by everyone, or one per agent.
struct StrategyProfile {
  std::vector<Strategy> strategies;

  static StrategyProfile symmetric(Strategy s) { return StrategyProfile{{std::move(s)}}; }
  bool is_symmetric() const { return strategies.size() == 1; }
  // Strategy of agent j in a population of `count`.
  const Strategy& at(std::size_t j, std::size_t count) const;
  void validate(std::size_t count) const;
};

std::vector<Report> apply_profile(const StrategyProfile& profile, const Population& population);

enum class CostModelKind { Linear, Chen };

// Realised privacy cost is `eta` times the model's bound; eta = 1 is the
// worst case.
struct CostModel {
  CostModelKind kind = CostModelKind::Linear;
  double eta = 1.0;
  void validate() const;
};

// Linear: eta * epsilon * cost. Chen: eta * 4 * cost * epsilon^2, which bounds
// the expected cost difference between two actions and needs epsilon <= 1.
double privacy_cost_bound(const CostModel& model, double cost, double epsilon);

enum class Action { Truth, Lie, Abstain };

std::string_view to_string(Action a);
Report report_for(Action a, int bit);

struct UtilityEstimate {
  double mean_payment = 0.0;
  double payment_ci_halfwidth = 0.0;  // 99%
  double privacy_cost = 0.0;
  double utility_lower_bound = 0.0;
  double mean_peer_estimate = 0.0;    // E[p~_{-i} | b_i]
  std::size_t trials = 0;
};

// Payments to one probe agent in a single simulated survey, for every action
// at once: the other n - 1 agents and the noise draw are shared, so the three
// columns use common random numbers.
struct ActionPayments {
  double truth = 0.0;
  double lie = 0.0;
  double abstain = 0.0;
  double peer_estimate = 0.0;
};

// Trial t draws theta from its posterior given `bit`, the other n - 1 agents
// given theta, applies `others` to them (index 0..n-2) and perturbs their sum
// with one Laplace draw, all from stream (seed, t).
std::vector<ActionPayments> simulate_probe_payments(int bit, const StrategyProfile& others,
                                                    const PriorSpec& prior,
                                                    const MechanismConfig& config,
                                                    std::size_t trials, std::uint64_t seed,
                                                    Execution exec = Execution::Parallel);

// Monte Carlo estimate of E[payment | b_i, action] and the utility lower bound
// payment - privacy cost bound. Conditions on the agent's bit only, never on
// its cost. Requires trials >= 1000.
UtilityEstimate expected_utility(const AgentType& agent, Action action,
                                 const StrategyProfile& others, const PriorSpec& prior,
                                 const MechanismConfig& config, const CostModel& cost_model,
                                 std::size_t trials, std::uint64_t seed,
                                 Execution exec = Execution::Parallel);

// The same, summarised from precomputed probe payments.
UtilityEstimate summarize_action(std::span<const ActionPayments> samples, Action action,
                                 double privacy_cost);

}  // namespace dpsurvey
