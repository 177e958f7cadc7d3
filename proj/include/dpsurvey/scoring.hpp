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

namespace dpsurvey {

// Parameters of the shifted and rescaled Brier rule
//
//   S(p, q) = rho * (B(p - c, q - c) - d)
//
// together with the posterior/tolerance inputs they were derived from. The
// derived triple is always recomputable bit-exactly from (p0, p1, alpha, beta).
struct ScoringParams {
  double c = 0.0;
  double d = 0.0;
  double rho = 1.0;
  double p0 = 0.0;
  double p1 = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  // Prediction attached to a reported bit: p0 for 0, p1 for 1.
  double prediction(int reported_bit) const { return reported_bit ? p1 : p0; }
};

// 2Iq + 2(1-I)(1-q) - q^2 - (1-q)^2. Throws PreconditionError for q outside
// [0, 1] or I outside {0, 1}.
double basic_brier(int outcome, double q);

// Expected basic Brier payment when the event has probability p:
// 1 - 2(p - 2pq + q^2). Defined on all reals.
double b_score(double p, double q);

// Derives (c, d, rho) so that truthful reports earn at least beta and lies
// earn at most 0 whenever the realised peer estimate stays within alpha of the
// truthful posterior:
//   c   = (p0 + p1 - 1) / 2
//   d   = 1/2 - (3/2)(p1 - p0)^2 + 2 alpha |p0 - p1|
//   rho = beta / (2 (p1 - p0)^2 - 4 alpha |p0 - p1|)
// Requires beta > 0, 0 <= alpha < |p1 - p0| / 2 and p0 != p1.
ScoringParams scoring_params(double p0, double p1, double alpha, double beta);

// rho * (b_score(p - c, q - c) - d).
double scaled_score(const ScoringParams& params, double p, double q);

// |rho (2 - 4 (q - c))|: the exact slope of scaled_score in p at fixed q.
double lipschitz_constant(const ScoringParams& params, double q);

}  // namespace dpsurvey
