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

#include "dpsurvey/agents.hpp"

#include <cmath>
#include <string>

#include "dpsurvey/errors.hpp"
#include "dpsurvey/privacy.hpp"
#include "dpsurvey/stats.hpp"

namespace dpsurvey {

void validate_strategy(const Strategy& s) {
  if (const auto* t = std::get_if<Threshold>(&s)) {
    if (!(t->tau >= 0.0) || std::isnan(t->tau)) {
      throw PreconditionError("strategy: threshold tau must be nonnegative");
    }
  } else if (const auto* c = std::get_if<ConstantBit>(&s)) {
    if (c->value != 0 && c->value != 1) throw PreconditionError("strategy: constant bit must be 0 or 1");
  }
}

Report apply_strategy(const Strategy& s, const AgentType& agent) {
  struct Visitor {
    const AgentType& agent;
    Report operator()(const Threshold& t) const {
      if (agent.cost <= t.tau) return report_of_bit(agent.bit);
      switch (t.off) {
        case OffThreshold::Abstain: return Report::Abstain;
        case OffThreshold::Lie: return report_of_bit(1 - agent.bit);
        case OffThreshold::Truth: return report_of_bit(agent.bit);
      }
      return Report::Abstain;
    }
    Report operator()(const AlwaysTruth&) const { return report_of_bit(agent.bit); }
    Report operator()(const AlwaysLie&) const { return report_of_bit(1 - agent.bit); }
    Report operator()(const AlwaysAbstain&) const { return Report::Abstain; }
    Report operator()(const ConstantBit& c) const { return report_of_bit(c.value); }
  };
  return std::visit(Visitor{agent}, s);
}

const Strategy& StrategyProfile::at(std::size_t j, std::size_t count) const {
  if (strategies.size() == 1) return strategies.front();
  if (strategies.size() != count || j >= count) {
    throw PreconditionError("strategy profile: expected 1 or " + std::to_string(count) +
                            " strategies, got " + std::to_string(strategies.size()));
  }
  return strategies[j];
}

void StrategyProfile::validate(std::size_t count) const {
  if (strategies.size() != 1 && strategies.size() != count) {
    throw PreconditionError("strategy profile: expected 1 or " + std::to_string(count) +
                            " strategies, got " + std::to_string(strategies.size()));
  }
  for (const auto& s : strategies) validate_strategy(s);
}

std::vector<Report> apply_profile(const StrategyProfile& profile, const Population& population) {
  profile.validate(population.size());
  std::vector<Report> reports(population.size());
  for (std::size_t j = 0; j < population.size(); ++j) {
    reports[j] = apply_strategy(profile.at(j, population.size()), population.agents[j]);
  }
  return reports;
}

void CostModel::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw PreconditionError("cost model: eta must lie in [0, 1]");
}

double privacy_cost_bound(const CostModel& model, double cost, double epsilon) {
  model.validate();
  if (!(cost >= 0.0)) throw PreconditionError("privacy_cost_bound: cost must be nonnegative");
  if (!(epsilon > 0.0)) throw PreconditionError("privacy_cost_bound: epsilon must be positive");
  if (model.kind == CostModelKind::Linear) return model.eta * epsilon * cost;
  if (epsilon > 1.0) throw PreconditionError("privacy_cost_bound: the Chen bound needs epsilon <= 1");
  return model.eta * 4.0 * cost * epsilon * epsilon;
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Truth: return "truth";
    case Action::Lie: return "lie";
    case Action::Abstain: return "abstain";
  }
  return "?";
}

Report report_for(Action a, int bit) {
  switch (a) {
    case Action::Truth: return report_of_bit(bit);
    case Action::Lie: return report_of_bit(1 - bit);
    case Action::Abstain: return Report::Abstain;
  }
  return Report::Abstain;
}

std::vector<ActionPayments> simulate_probe_payments(int bit, const StrategyProfile& others,
                                                    const PriorSpec& prior,
                                                    const MechanismConfig& config,
                                                    std::size_t trials, std::uint64_t seed,
                                                    Execution exec) {
  if (bit != 0 && bit != 1) throw PreconditionError("probe: bit must be 0 or 1");
  prior.validate();
  config.validate();
  const std::size_t m = config.n - 1;
  others.validate(m);
  const ScoringParams params = config.scoring();
  const double scale = config.noise().scale();
  const auto n_others = static_cast<double>(m);

  return map_trials<ActionPayments>(trials, exec, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    const double theta = sample_posterior_theta(prior, bit, rng);
    std::int64_t sum = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const AgentType other = sample_agent(prior, theta, rng);
      sum += report_bit(apply_strategy(others.at(j, m), other));
    }
    const double noisy_others = static_cast<double>(sum) + laplace_sample(scale, rng);
    ActionPayments out;
    // The peer estimate p~_{-i} does not depend on the probe's own report.
    out.peer_estimate = clamp_unit(noisy_others / n_others);
    for (Action a : {Action::Truth, Action::Lie}) {
      const Report r = report_for(a, bit);
      const double pay = billboard_payment(params, r, noisy_others + report_bit(r), config.n,
                                           config.clamp_payments);
      (a == Action::Truth ? out.truth : out.lie) = pay;
    }
    out.abstain = 0.0;
    return out;
  });
}

UtilityEstimate summarize_action(std::span<const ActionPayments> samples, Action action,
                                 double privacy_cost) {
  std::vector<double> pay(samples.size());
  double peer = 0.0;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    pay[t] = action == Action::Truth ? samples[t].truth
             : action == Action::Lie ? samples[t].lie
                                     : samples[t].abstain;
    peer += samples[t].peer_estimate;
  }
  UtilityEstimate est;
  est.trials = samples.size();
  est.privacy_cost = privacy_cost;
  if (action == Action::Abstain) {
    est.mean_payment = 0.0;
    est.payment_ci_halfwidth = 0.0;
  } else {
    const SampleSummary s = summarize(pay);
    est.mean_payment = s.mean;
    est.payment_ci_halfwidth = s.ci_halfwidth(kZ99);
  }
  est.utility_lower_bound = est.mean_payment - privacy_cost;
  est.mean_peer_estimate = samples.empty() ? 0.0 : peer / static_cast<double>(samples.size());
  return est;
}

UtilityEstimate expected_utility(const AgentType& agent, Action action,
                                 const StrategyProfile& others, const PriorSpec& prior,
                                 const MechanismConfig& config, const CostModel& cost_model,
                                 std::size_t trials, std::uint64_t seed, Execution exec) {
  if (trials < 1000) throw PreconditionError("expected_utility: needs at least 1000 trials");
  const double cost = privacy_cost_bound(cost_model, agent.cost, config.epsilon);
  const auto samples = simulate_probe_payments(agent.bit, others, prior, config, trials, seed, exec);
  return summarize_action(samples, action, cost);
}

}  // namespace dpsurvey
