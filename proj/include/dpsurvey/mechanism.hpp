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
#include <span>
#include <vector>

#include "dpsurvey/priors.hpp"
#include "dpsurvey/privacy.hpp"
#include "dpsurvey/report.hpp"
#include "dpsurvey/rng.hpp"
#include "dpsurvey/scoring.hpp"

namespace dpsurvey {

// Parameters of one survey: population size, participation goal 1 - alpha,
// surplus payment beta, noise level epsilon and the posteriors p0/p1 the
// payments are scored against.
struct MechanismConfig {
  std::size_t n = 2;
  double alpha = 0.1;
  double beta = 1.0;
  double epsilon = 1.0;
  double p0 = 0.0;
  double p1 = 1.0;
  // Floors every payment at zero. Off by default: the analysed mechanism pays
  // the raw score, which is negative for a lie.
  bool clamp_payments = false;

  // Throws PreconditionError (or DegeneratePriorError) when the scoring
  // parameters cannot be derived.
  void validate() const;
  ScoringParams scoring() const;
  NoiseSpec noise() const { return NoiseSpec{epsilon, NoiseMode::Sample}; }
};

struct MechanismOutcome {
  double estimate = 0.0;         // published p~
  std::vector<double> payments;  // 0 for abstainers
  double b_bar = 0.0;            // noisy sum; audit only, never published
  double noise_draw = 0.0;       // audit only
};

// Exact-testing hooks. Never used on the default path.
struct MechanismTestHooks {
  bool disable_noise = false;
  std::optional<double> forced_b_bar;
};

// Runs the survey: abstainers count as 0 in the sum, one Laplace draw
// perturbs the sum, every participant is paid the scaled Brier score of its
// leave-one-out estimate against the posterior its report implies. Consumes
// exactly one draw from rng.
MechanismOutcome run(const MechanismConfig& config, std::span<const Report> reports, Rng& rng);

MechanismOutcome run_with_test_hooks(const MechanismConfig& config,
                                     std::span<const Report> reports, Rng& rng,
                                     const MechanismTestHooks& hooks);

// Payment to one agent as a function of its own report and the noisy sum
// alone (billboard form).
double billboard_payment(const ScoringParams& params, Report own, double b_bar, std::size_t n,
                         bool clamp_payments);

std::int64_t reported_sum(std::span<const Report> reports);

// What everyone except agent i can see.
struct ObservableView {
  double estimate = 0.0;
  std::vector<double> other_payments;
};

ObservableView observable_view(const MechanismOutcome& outcome, std::size_t i);

// Fraction of agents whose bit is 1.
double true_statistic(const Population& population);

}  // namespace dpsurvey
