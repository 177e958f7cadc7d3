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

#include "dpsurvey/errors.hpp"

namespace dpsurvey {

void MechanismConfig::validate() const {
  if (n < 2) throw PreconditionError("mechanism: n must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("mechanism: alpha must lie in (0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw PreconditionError("mechanism: epsilon must be positive");
  }
  scoring_params(p0, p1, alpha, beta);
}

ScoringParams MechanismConfig::scoring() const { return scoring_params(p0, p1, alpha, beta); }

std::int64_t reported_sum(std::span<const Report> reports) {
  std::int64_t sum = 0;
  for (Report r : reports) sum += report_bit(r);
  return sum;
}

double billboard_payment(const ScoringParams& params, Report own, double b_bar, std::size_t n,
                         bool clamp_payments) {
  if (!participates(own)) return 0.0;
  const int bit = report_bit(own);
  const double peer_estimate = clamp_noisy_sum(b_bar, bit, n).p_tilde_minus_i;
  const double payment = scaled_score(params, peer_estimate, params.prediction(bit));
  return clamp_payments ? std::max(0.0, payment) : payment;
}

MechanismOutcome run_with_test_hooks(const MechanismConfig& config,
                                     std::span<const Report> reports, Rng& rng,
                                     const MechanismTestHooks& hooks) {
  if (reports.size() != config.n) {
    throw PreconditionError("mechanism: expected " + std::to_string(config.n) + " reports, got " +
                            std::to_string(reports.size()));
  }
  config.validate();
  const ScoringParams params = config.scoring();

  MechanismOutcome out;
  const std::int64_t bhat = reported_sum(reports);
  if (hooks.forced_b_bar) {
    out.b_bar = *hooks.forced_b_bar;
    out.noise_draw = out.b_bar - static_cast<double>(bhat);
  } else {
    out.noise_draw = hooks.disable_noise ? 0.0 : laplace_sample(config.noise().scale(), rng);
    out.b_bar = static_cast<double>(bhat) + out.noise_draw;
  }
  out.estimate = clamp_unit(out.b_bar / static_cast<double>(config.n));
  out.payments.resize(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    out.payments[i] = billboard_payment(params, reports[i], out.b_bar, config.n, config.clamp_payments);
  }
  return out;
}

MechanismOutcome run(const MechanismConfig& config, std::span<const Report> reports, Rng& rng) {
  return run_with_test_hooks(config, reports, rng, MechanismTestHooks{});
}

ObservableView observable_view(const MechanismOutcome& outcome, std::size_t i) {
  if (i >= outcome.payments.size()) throw PreconditionError("observable_view: index out of range");
  ObservableView view;
  view.estimate = outcome.estimate;
  view.other_payments.reserve(outcome.payments.size() - 1);
  for (std::size_t j = 0; j < outcome.payments.size(); ++j) {
    if (j != i) view.other_payments.push_back(outcome.payments[j]);
  }
  return view;
}

double true_statistic(const Population& population) {
  if (population.size() == 0) throw PreconditionError("true_statistic: empty population");
  std::size_t ones = 0;
  for (const auto& agent : population.agents) ones += agent.bit == 1 ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(population.size());
}

}  // namespace dpsurvey
