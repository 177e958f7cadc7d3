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

#include "dpsurvey/stats.hpp"

#include <cmath>

#include "dpsurvey/errors.hpp"

namespace dpsurvey {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "Pass";
    case Verdict::Fail:
      return "Fail";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict worst(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) {
    return Verdict::Inconclusive;
  }
  return Verdict::Pass;
}

double SampleSummary::standard_error() const {
  if (count == 0) return 0.0;
  return stddev / std::sqrt(static_cast<double>(count));
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  double m2 = 0.0;
  for (double v : values) {
    ++s.count;
    const double delta = v - s.mean;
    s.mean += delta / static_cast<double>(s.count);
    m2 += delta * (v - s.mean);
  }
  if (s.count > 1) s.stddev = std::sqrt(m2 / static_cast<double>(s.count - 1));
  return s;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw PreconditionError("ols_slope needs at least two paired points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw PreconditionError("ols_slope: x values are all equal");
  return sxy / sxx;
}

Verdict ci_at_least(double mean, double halfwidth, double threshold) {
  if (mean - halfwidth >= threshold) return Verdict::Pass;
  if (mean + halfwidth < threshold) return Verdict::Fail;
  return Verdict::Inconclusive;
}

Verdict ci_at_most(double mean, double halfwidth, double threshold) {
  if (mean + halfwidth <= threshold) return Verdict::Pass;
  if (mean - halfwidth > threshold) return Verdict::Fail;
  return Verdict::Inconclusive;
}

}  // namespace dpsurvey
