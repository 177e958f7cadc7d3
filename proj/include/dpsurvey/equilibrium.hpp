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
#include <optional>
#include <string_view>
#include <vector>

#include "dpsurvey/agents.hpp"
#include "dpsurvey/mechanism.hpp"
#include "dpsurvey/parallel.hpp"
#include "dpsurvey/priors.hpp"
#include "dpsurvey/stats.hpp"

namespace dpsurvey {

// Linear: epsilon * tau. Chen: 4 epsilon^2 tau (epsilon <= 1). tau must be
// positive.
double beta_rule(CostModelKind model, double epsilon, double tau);

// ln(1/delta) / (alpha n).
double epsilon_rule(double alpha, double delta, std::size_t n);

// Accuracy guaranteed with probability 1 - delta: ln(2/delta)/(epsilon n) + alpha.
double alpha_prime(double alpha, double delta, double epsilon, std::size_t n);

// Whether the chosen epsilon reaches the 2 alpha accuracy target, i.e.
// ln(2/delta)/(epsilon n) <= alpha.
struct AccuracyLint {
  double alpha_prime = 0.0;
  double target = 0.0;
  bool meets_target = false;
};
AccuracyLint accuracy_lint(double alpha, double delta, double epsilon, std::size_t n);

// Upper bound on one equilibrium payment when the peer estimate deviates by
// at most `deviation` from the posterior: beta + 2 rho (alpha + deviation)|p0 - p1|.
double payment_upper_bound(const ScoringParams& params, double deviation);

// n (beta + 4 rho alpha |p0 - p1|), written through rho's definition.
double total_cost_bound(double beta, double p0, double p1, double alpha, std::size_t n);

// The same bound with Chen beta = 4 eps^2 tau and eps = ln(1/delta)/(alpha n)
// substituted: 4 ln(1/delta)^2 tau / (alpha^2 n) * (1 + 4 alpha |dp| / (2 dp^2 - 4 alpha |dp|)).
double chen_total_cost_bound(double tau, double p0, double p1, double alpha, double delta,
                             std::size_t n);

enum class PosteriorSource { Exact, Clamped };

// Everything needed to stand up a survey. Unset epsilon / beta follow the
// rules above; the threshold always uses delta / 2.
struct SurveySetup {
  PriorSpec prior;
  std::size_t n = 2;
  double alpha = 0.1;
  double delta = 0.1;
  std::optional<double> epsilon;
  std::optional<double> beta;
  CostModelKind beta_rule = CostModelKind::Linear;
  PosteriorSource posteriors = PosteriorSource::Exact;
  std::size_t threshold_trials = 2000;
  std::size_t posterior_samples = 20000;
  bool clamp_payments = false;
  std::uint64_t seed = 0;
};

struct ResolvedSurvey {
  double epsilon = 0.0;
  double beta = 0.0;
  CostThreshold threshold;
  Posteriors posteriors;
  MechanismConfig mechanism;
  double tau() const { return threshold.tau; }
};

// Sub-streams of the setup seed, kept apart so that e.g. changing the trial
// count never shifts the threshold estimate.
enum class SeedPurpose : std::uint64_t { Threshold = 1, Posterior = 2, Simulation = 3, Probe0 = 4, Probe1 = 5 };
std::uint64_t purpose_seed(std::uint64_t seed, SeedPurpose purpose);

ResolvedSurvey resolve(const SurveySetup& setup);

// Equilibrium profile: truthful below tau, abstain above.
inline StrategyProfile threshold_profile(double tau) {
  return StrategyProfile::symmetric(Threshold{tau, OffThreshold::Abstain});
}

struct BitAudit {
  int bit = 0;
  UtilityEstimate truth;
  UtilityEstimate lie;
  UtilityEstimate abstain;
  double peer_deviation = 0.0;  // |E[p~_{-i} | b_i] - p_{b_i}|
  Verdict truth_ge_beta = Verdict::Fail;
  Verdict lie_le_zero = Verdict::Fail;
  std::vector<ActionPayments> samples;  // per trial
};

struct EquilibriumAuditReport {
  ResolvedSurvey survey;
  CostModel cost_model;
  double probe_cost = 0.0;
  std::size_t trials = 0;
  BitAudit bits[2];
  // Worst case over both bits.
  double truth_payment_mean = 0.0;
  double truth_payment_ci = 0.0;
  double lie_payment_mean = 0.0;
  double lie_payment_ci = 0.0;
  double abstain_utility_bound = 0.0;
  Verdict truth_ge_beta = Verdict::Fail;
  Verdict lie_le_zero = Verdict::Fail;
  // Does beta cover the worst-case privacy cost at tau? Deterministic.
  Verdict beta_margin = Verdict::Fail;
  Verdict truth_dominates = Verdict::Fail;

  Verdict overall() const { return truth_dominates; }
};

// Fixes the others to threshold play at tau, then for a probe agent with each
// bit and cost tau (1 - 1e-6) estimates payments for truth, lie and abstain.
// The payment for truth is tested against beta and the payment for a lie
// against zero using 99% intervals. truth_dominates is the worst of the two
// payment verdicts and beta_margin.
EquilibriumAuditReport best_response_audit(const SurveySetup& setup, const CostModel& cost_model,
                                           std::size_t trials,
                                           Execution exec = Execution::Parallel);

// Also used by the `run` command.
struct TrialRecord {
  std::size_t trial = 0;
  double p_hat = 0.0;
  double p_tilde = 0.0;
  double abs_error = 0.0;
  double total_payment = 0.0;
  double min_payment = 0.0;
  double max_payment = 0.0;
  std::size_t participants = 0;
  std::size_t non_truthful = 0;  // reports that differ from the bit, abstentions included
};

// Trial t on stream (seed, t): draw theta and a population of n, apply the
// profile, run the mechanism.
std::vector<TrialRecord> simulate_surveys(const PriorSpec& prior, const MechanismConfig& config,
                                          const StrategyProfile& profile, NoiseMode noise,
                                          std::size_t trials, std::uint64_t seed,
                                          Execution exec = Execution::Parallel);

struct AccuracyReport {
  double alpha_prime = 0.0;
  double success_fraction = 0.0;
  std::size_t trials = 0;
  double delta = 0.0;
  double required_fraction = 0.0;  // 1 - delta - 3 sigma
  Verdict verdict = Verdict::Fail;
  std::vector<TrialRecord> records;
};

// Records whether |p_hat - p_tilde| <= alpha' in each trial. With noise
// disabled alpha' = alpha. Requires trials >= 100.
AccuracyReport accuracy_experiment(const ResolvedSurvey& survey, const SurveySetup& setup,
                                   const StrategyProfile& profile, std::size_t trials,
                                   NoiseMode noise = NoiseMode::Sample,
                                   Execution exec = Execution::Parallel);

struct CostScalingRow {
  std::size_t n = 0;
  double epsilon = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;
  double total_payment_mean = 0.0;
  double total_payment_se = 0.0;
  double cost_bound = 0.0;        // through rho
  double closed_form_bound = 0.0; // Chen substitution
  Verdict within_bound = Verdict::Fail;
  std::vector<TrialRecord> records;
};

struct CostScalingReport {
  std::vector<CostScalingRow> rows;
  double loglog_slope = 0.0;
  double first_last_ratio = 0.0;
};

// Chen rules at every n (epsilon must stay <= 1), threshold play, mean total
// payment per n, and the OLS slope of ln mean against ln n. `setup.n` is
// ignored. Requires trials >= 200.
CostScalingReport cost_scaling_experiment(const SurveySetup& setup, std::span<const std::size_t> ns,
                                          std::size_t trials,
                                          Execution exec = Execution::Parallel);

}  // namespace dpsurvey
