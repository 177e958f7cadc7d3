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
#include <string>

#include "dpsurvey/errors.hpp"

namespace dpsurvey {

double basic_brier(int outcome, double q) {
  if (outcome != 0 && outcome != 1) {
    throw PreconditionError("basic_brier: outcome must be 0 or 1");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw PreconditionError("basic_brier: q must lie in [0, 1], got " + std::to_string(q));
  }
  const double i = outcome;
  return 2 * i * q + 2 * (1 - i) * (1 - q) - q * q - (1 - q) * (1 - q);
}

double b_score(double p, double q) { return 1 - 2 * (p - 2 * p * q + q * q); }

ScoringParams scoring_params(double p0, double p1, double alpha, double beta) {
  if (!(beta > 0.0)) throw PreconditionError("scoring_params: beta must be positive");
  if (!(p0 >= 0.0 && p0 <= 1.0 && p1 >= 0.0 && p1 <= 1.0)) {
    throw PreconditionError("scoring_params: posteriors must lie in [0, 1]");
  }
  if (p0 == p1) {
    throw DegeneratePriorError("scoring_params: p0 == p1, reports carry no information");
  }
  const double gap = std::fabs(p0 - p1);
  if (!(alpha >= 0.0) || !(alpha < gap / 2)) {
    throw PreconditionError("scoring_params: alpha must satisfy 0 <= alpha < |p1 - p0| / 2");
  }
  ScoringParams s;
  s.p0 = p0;
  s.p1 = p1;
  s.alpha = alpha;
  s.beta = beta;
  s.c = (p0 + p1 - 1) / 2;
  s.d = 0.5 - 1.5 * (p1 - p0) * (p1 - p0) + 2 * alpha * gap;
  s.rho = beta / (2 * (p1 - p0) * (p1 - p0) - 4 * alpha * gap);
  return s;
}

double scaled_score(const ScoringParams& params, double p, double q) {
  return params.rho * (b_score(p - params.c, q - params.c) - params.d);
}

double lipschitz_constant(const ScoringParams& params, double q) {
  return std::fabs(params.rho * (2 - 4 * (q - params.c)));
}

}  // namespace dpsurvey
