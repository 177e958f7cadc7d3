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
#include <span>
#include <string_view>

namespace dpsurvey {

enum class Verdict { Pass, Fail, Inconclusive };

std::string_view to_string(Verdict v);

// Fail dominates Inconclusive dominates Pass.
Verdict worst(Verdict a, Verdict b);

// Two-sided normal quantile for a 99% interval.
inline constexpr double kZ99 = 2.5758293035489004;

struct SampleSummary {
  double mean = 0.0;
  double stddev = 0.0;  // unbiased sample standard deviation
  std::size_t count = 0;

  double standard_error() const;
  double ci_halfwidth(double z) const { return z * standard_error(); }
};

// Welford accumulation in input order.
SampleSummary summarize(std::span<const double> values);

// Ordinary least squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

// Three-way test of "value >= threshold" given a CI halfwidth: Pass when the
// whole interval clears the threshold, Fail when it lies entirely below.
Verdict ci_at_least(double mean, double halfwidth, double threshold);
Verdict ci_at_most(double mean, double halfwidth, double threshold);

}  // namespace dpsurvey
