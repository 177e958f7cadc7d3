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

#include "dpsurvey/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "dpsurvey/errors.hpp"

namespace dpsurvey {

double beta_rule(CostModelKind model, double epsilon, double tau) {
  if (!(epsilon > 0.0)) throw PreconditionError("beta_rule: epsilon must be positive");
  if (!(tau > 0.0)) throw PreconditionError("beta_rule: tau must be positive for a positive beta");
  if (model == CostModelKind::Linear) return epsilon * tau;
  if (epsilon > 1.0) throw PreconditionError("beta_rule: the Chen rule needs epsilon <= 1");
  return 4.0 * epsilon * epsilon * tau;
}

double epsilon_rule(double alpha, double delta, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("epsilon_rule: alpha must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("epsilon_rule: delta must lie in (0, 1)");
  if (n < 1) throw PreconditionError("epsilon_rule: n must be positive");
  return std::log(1.0 / delta) / (alpha * static_cast<double>(n));
}

double alpha_prime(double alpha, double delta, double epsilon, std::size_t n) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("alpha_prime: delta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw PreconditionError("alpha_prime: epsilon must be positive");
  if (n < 1) throw PreconditionError("alpha_prime: n must be positive");
  return std::log(2.0 / delta) / (epsilon * static_cast<double>(n)) + alpha;
}

AccuracyLint accuracy_lint(double alpha, double delta, double epsilon, std::size_t n) {
  AccuracyLint lint;
  lint.alpha_prime = alpha_prime(alpha, delta, epsilon, n);
  lint.target = 2.0 * alpha;
  lint.meets_target = lint.alpha_prime <= lint.target;
  return lint;
}

double payment_upper_bound(const ScoringParams& params, double deviation) {
  return params.beta + 2.0 * params.rho * (params.alpha + deviation) * std::fabs(params.p0 - params.p1);
}

namespace {

double excess_factor(double p0, double p1, double alpha) {
  const double gap = std::fabs(p0 - p1);
  const double denom = 2.0 * (p1 - p0) * (p1 - p0) - 4.0 * alpha * gap;
  if (!(denom > 0.0)) throw PreconditionError("cost bound: requires alpha < |p1 - p0| / 2");
  return 1.0 + 4.0 * alpha * gap / denom;
}

}  // namespace

double total_cost_bound(double beta, double p0, double p1, double alpha, std::size_t n) {
  return static_cast<double>(n) * (beta * excess_factor(p0, p1, alpha));
}

double chen_total_cost_bound(double tau, double p0, double p1, double alpha, double delta,
                             std::size_t n) {
  const double l = std::log(1.0 / delta);
  return 4.0 * l * l * tau / (alpha * alpha * static_cast<double>(n)) * excess_factor(p0, p1, alpha);
}

std::uint64_t purpose_seed(std::uint64_t seed, SeedPurpose purpose) {
  return derive_seed(seed, static_cast<std::uint64_t>(purpose));
}

ResolvedSurvey resolve(const SurveySetup& setup) {
  setup.prior.validate();
  if (setup.n < 2) throw PreconditionError("survey: n must be at least 2");
  if (!(setup.delta > 0.0 && setup.delta < 1.0)) throw PreconditionError("survey: delta must lie in (0, 1)");

  ResolvedSurvey r;
  r.epsilon = setup.epsilon ? *setup.epsilon : epsilon_rule(setup.alpha, setup.delta, setup.n);
  if (!(r.epsilon > 0.0)) throw PreconditionError("survey: epsilon must be positive");

  if (setup.posteriors == PosteriorSource::Exact) {
    r.posteriors = informative_posteriors(setup.prior);
  } else {
    const NoiseSpec noise{r.epsilon, NoiseMode::Sample};
    const std::uint64_t s = purpose_seed(setup.seed, SeedPurpose::Posterior);
    r.posteriors.p0 = posterior_clamped_mean(setup.prior, 0, setup.n, noise, setup.posterior_samples, s);
    r.posteriors.p1 = posterior_clamped_mean(setup.prior, 1, setup.n, noise, setup.posterior_samples,
                                             derive_seed(s, 1));
  }

  r.threshold = cost_threshold(setup.prior, setup.alpha, setup.delta / 2.0, setup.n,
                               setup.threshold_trials, purpose_seed(setup.seed, SeedPurpose::Threshold));
  r.beta = setup.beta ? *setup.beta : beta_rule(setup.beta_rule, r.epsilon, r.threshold.tau);

  r.mechanism.n = setup.n;
  r.mechanism.alpha = setup.alpha;
  r.mechanism.beta = r.beta;
  r.mechanism.epsilon = r.epsilon;
  r.mechanism.p0 = r.posteriors.p0;
  r.mechanism.p1 = r.posteriors.p1;
  r.mechanism.clamp_payments = setup.clamp_payments;
  r.mechanism.validate();
  return r;
}

EquilibriumAuditReport best_response_audit(const SurveySetup& setup, const CostModel& cost_model,
                                           std::size_t trials, Execution exec) {
  if (trials < 1000) throw PreconditionError("best_response_audit: needs at least 1000 trials");
  cost_model.validate();
  EquilibriumAuditReport rep;
  rep.survey = resolve(setup);
  rep.cost_model = cost_model;
  rep.trials = trials;
  const double tau = rep.survey.tau();
  rep.probe_cost = tau * (1.0 - 1e-6);
  const double privacy_cost = privacy_cost_bound(cost_model, rep.probe_cost, rep.survey.epsilon);
  const StrategyProfile others = threshold_profile(tau);

  for (int bit = 0; bit <= 1; ++bit) {
    const auto seed = purpose_seed(setup.seed, bit ? SeedPurpose::Probe1 : SeedPurpose::Probe0);
    auto samples =
        simulate_probe_payments(bit, others, setup.prior, rep.survey.mechanism, trials, seed, exec);
    BitAudit& b = rep.bits[bit];
    b.bit = bit;
    b.truth = summarize_action(samples, Action::Truth, privacy_cost);
    b.lie = summarize_action(samples, Action::Lie, privacy_cost);
    b.abstain = summarize_action(samples, Action::Abstain, privacy_cost);
    b.peer_deviation = std::fabs(b.truth.mean_peer_estimate - rep.survey.posteriors.prediction(bit));
    b.truth_ge_beta = ci_at_least(b.truth.mean_payment, b.truth.payment_ci_halfwidth, rep.survey.beta);
    b.lie_le_zero = ci_at_most(b.lie.mean_payment, b.lie.payment_ci_halfwidth, 0.0);
    b.samples = std::move(samples);
  }

  // Worst case: the bit whose interval sits lowest for truth, highest for lies.
  const auto& t0 = rep.bits[0].truth;
  const auto& t1 = rep.bits[1].truth;
  const auto& worst_truth =
      t0.mean_payment - t0.payment_ci_halfwidth <= t1.mean_payment - t1.payment_ci_halfwidth ? t0 : t1;
  const auto& l0 = rep.bits[0].lie;
  const auto& l1 = rep.bits[1].lie;
  const auto& worst_lie =
      l0.mean_payment + l0.payment_ci_halfwidth >= l1.mean_payment + l1.payment_ci_halfwidth ? l0 : l1;
  rep.truth_payment_mean = worst_truth.mean_payment;
  rep.truth_payment_ci = worst_truth.payment_ci_halfwidth;
  rep.lie_payment_mean = worst_lie.mean_payment;
  rep.lie_payment_ci = worst_lie.payment_ci_halfwidth;
  rep.abstain_utility_bound =
      std::max(rep.bits[0].abstain.utility_lower_bound, rep.bits[1].abstain.utility_lower_bound);

  rep.truth_ge_beta = worst(rep.bits[0].truth_ge_beta, rep.bits[1].truth_ge_beta);
  rep.lie_le_zero = worst(rep.bits[0].lie_le_zero, rep.bits[1].lie_le_zero);

  // Worst-case (eta = 1) cost of an agent sitting exactly at tau.
  const double needed =
      privacy_cost_bound(CostModel{cost_model.kind, 1.0}, tau, rep.survey.epsilon);
  rep.beta_margin = rep.survey.beta >= needed * (1.0 - 1e-12) ? Verdict::Pass : Verdict::Fail;
  rep.truth_dominates = worst(worst(rep.truth_ge_beta, rep.lie_le_zero), rep.beta_margin);
  return rep;
}

std::vector<TrialRecord> simulate_surveys(const PriorSpec& prior, const MechanismConfig& config,
                                          const StrategyProfile& profile, NoiseMode noise,
                                          std::size_t trials, std::uint64_t seed, Execution exec) {
  prior.validate();
  config.validate();
  profile.validate(config.n);
  MechanismTestHooks hooks;
  hooks.disable_noise = noise == NoiseMode::Disabled;

  return map_trials<TrialRecord>(trials, exec, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    const double theta = sample_theta(prior, rng);
    std::vector<Report> reports(config.n);
    std::size_t ones = 0;
    std::size_t non_truthful = 0;
    for (std::size_t j = 0; j < config.n; ++j) {
      const AgentType agent = sample_agent(prior, theta, rng);
      ones += static_cast<std::size_t>(agent.bit);
      reports[j] = apply_strategy(profile.at(j, config.n), agent);
      non_truthful += reports[j] == report_of_bit(agent.bit) ? 0 : 1;
    }
    const MechanismOutcome out = run_with_test_hooks(config, reports, rng, hooks);

    TrialRecord rec;
    rec.trial = t;
    rec.p_hat = static_cast<double>(ones) / static_cast<double>(config.n);
    rec.p_tilde = out.estimate;
    rec.abs_error = std::fabs(rec.p_hat - rec.p_tilde);
    rec.non_truthful = non_truthful;
    rec.min_payment = out.payments.front();
    rec.max_payment = out.payments.front();
    for (std::size_t j = 0; j < config.n; ++j) {
      rec.total_payment += out.payments[j];
      rec.min_payment = std::min(rec.min_payment, out.payments[j]);
      rec.max_payment = std::max(rec.max_payment, out.payments[j]);
      rec.participants += participates(reports[j]) ? 1 : 0;
    }
    return rec;
  });
}

AccuracyReport accuracy_experiment(const ResolvedSurvey& survey, const SurveySetup& setup,
                                   const StrategyProfile& profile, std::size_t trials,
                                   NoiseMode noise, Execution exec) {
  if (trials < 100) throw PreconditionError("accuracy_experiment: needs at least 100 trials");
  AccuracyReport rep;
  rep.trials = trials;
  rep.delta = setup.delta;
  rep.alpha_prime = noise == NoiseMode::Disabled
                        ? setup.alpha
                        : alpha_prime(setup.alpha, setup.delta, survey.epsilon, setup.n);
  rep.records = simulate_surveys(setup.prior, survey.mechanism, profile, noise, trials,
                                 purpose_seed(setup.seed, SeedPurpose::Simulation), exec);
  std::size_t hits = 0;
  for (const auto& r : rep.records) hits += r.abs_error <= rep.alpha_prime ? 1 : 0;
  rep.success_fraction = static_cast<double>(hits) / static_cast<double>(trials);
  const double sigma = std::sqrt(setup.delta * (1.0 - setup.delta) / static_cast<double>(trials));
  rep.required_fraction = 1.0 - setup.delta - 3.0 * sigma;
  rep.verdict = rep.success_fraction >= rep.required_fraction ? Verdict::Pass : Verdict::Fail;
  return rep;
}

CostScalingReport cost_scaling_experiment(const SurveySetup& setup, std::span<const std::size_t> ns,
                                          std::size_t trials, Execution exec) {
  if (trials < 200) throw PreconditionError("cost_scaling_experiment: needs at least 200 trials per n");
  if (ns.size() < 2) throw PreconditionError("cost_scaling_experiment: needs at least two values of n");
  for (std::size_t n : ns) {
    if (epsilon_rule(setup.alpha, setup.delta, n) > 1.0) {
      throw PreconditionError("cost_scaling_experiment: n = " + std::to_string(n) +
                              " gives epsilon > 1, outside the Chen cost model");
    }
  }

  CostScalingReport rep;
  std::vector<double> log_n;
  std::vector<double> log_mean;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    SurveySetup s = setup;
    s.n = ns[k];
    s.epsilon.reset();
    s.beta.reset();
    s.beta_rule = CostModelKind::Chen;
    s.seed = derive_seed(setup.seed, 100 + k);
    const ResolvedSurvey survey = resolve(s);

    CostScalingRow row;
    row.n = s.n;
    row.epsilon = survey.epsilon;
    row.beta = survey.beta;
    row.tau = survey.tau();
    row.p0 = survey.posteriors.p0;
    row.p1 = survey.posteriors.p1;
    row.records = simulate_surveys(s.prior, survey.mechanism, threshold_profile(row.tau), NoiseMode::Sample,
                                   trials, purpose_seed(s.seed, SeedPurpose::Simulation), exec);
    std::vector<double> totals(row.records.size());
    for (std::size_t t = 0; t < totals.size(); ++t) totals[t] = row.records[t].total_payment;
    const SampleSummary sum = summarize(totals);
    row.total_payment_mean = sum.mean;
    row.total_payment_se = sum.standard_error();
    row.cost_bound = total_cost_bound(row.beta, row.p0, row.p1, s.alpha, s.n);
    row.closed_form_bound = chen_total_cost_bound(row.tau, row.p0, row.p1, s.alpha, s.delta, s.n);
    row.within_bound = row.total_payment_mean <= row.cost_bound + 3.0 * row.total_payment_se
                           ? Verdict::Pass
                           : Verdict::Fail;
    if (!(row.total_payment_mean > 0.0)) {
      throw InsufficientDataError("cost_scaling_experiment: nonpositive mean total payment at n = " +
                                  std::to_string(s.n));
    }
    log_n.push_back(std::log(static_cast<double>(s.n)));
    log_mean.push_back(std::log(row.total_payment_mean));
    rep.rows.push_back(std::move(row));
  }
  rep.loglog_slope = ols_slope(log_n, log_mean);
  rep.first_last_ratio = rep.rows.front().total_payment_mean / rep.rows.back().total_payment_mean;
  return rep;
}

}  // namespace dpsurvey
