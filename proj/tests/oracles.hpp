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

// Independent reference computations used as test oracles. Nothing here calls
// into the library under test.

#include <cmath>
#include <cstddef>
#include <limits>

namespace dpsurvey::oracle {

// One unit in the last place at magnitude |x| (x != 0), or the smallest
// normal spacing at 0.
inline double ulp(double x) {
  const double a = std::fabs(x);
  if (a == 0.0) return std::numeric_limits<double>::denorm_min();
  return std::nextafter(a, std::numeric_limits<double>::infinity()) - a;
}

// |a - b| measured in ulps of `scale`, the magnitude of the largest term the
// computation passed through. Identities that cancel large terms can only be
// exact relative to that scale.
inline double scaled_ulps(double a, double b, double scale) {
  return std::fabs(a - b) / ulp(scale);
}

// Scoring formulas in long double, written independently of the library.
inline long double brier_ld(long double p, long double q) {
  return 1.0L - 2.0L * (p - 2.0L * p * q + q * q);
}

struct ParamsLd {
  long double c, d, rho;
};

inline ParamsLd params_ld(long double p0, long double p1, long double alpha, long double beta) {
  const long double gap = std::fabs(p1 - p0);
  return {(p0 + p1 - 1.0L) / 2.0L, 0.5L - 1.5L * gap * gap + 2.0L * alpha * gap,
          beta / (2.0L * gap * gap - 4.0L * alpha * gap)};
}

inline long double scaled_ld(const ParamsLd& s, long double p, long double q) {
  return s.rho * (brier_ld(p - s.c, q - s.c) - s.d);
}

// P[Binomial(n, q) >= k] by summing the pmf in long double.
inline double binomial_tail_sum(std::size_t n, double q, std::size_t k) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  long double total = 0.0L;
  const long double lq = std::log(static_cast<long double>(q));
  const long double lr = std::log1p(-static_cast<long double>(q));
  for (std::size_t j = k; j <= n; ++j) {
    const long double log_choose = std::lgamma(static_cast<long double>(n) + 1) -
                                   std::lgamma(static_cast<long double>(j) + 1) -
                                   std::lgamma(static_cast<long double>(n - j) + 1);
    total += std::exp(log_choose + j * lq + (n - j) * lr);
  }
  return static_cast<double>(total);
}

// Smallest grid point k * step in [0, 1] with P[Bin(n, k * step) >= need] >= level,
// found by a linear scan.
inline double uniform_population_threshold(std::size_t n, std::size_t need, double level,
                                           double step = 1e-4) {
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / step));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double tau = static_cast<double>(k) / static_cast<double>(steps);
    if (binomial_tail_sum(n, tau, need) >= level) return tau;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// 3-sigma binomial allowance around p at `trials` draws.
inline double three_sigma(double p, std::size_t trials) {
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

// Largest term magnitude met while evaluating 1 - 2(p - 2pq + q^2).
inline double brier_scale(double p, double q) {
  return 1.0 + 2.0 * std::fabs(p) + 4.0 * std::fabs(p * q) + 2.0 * q * q;
}

// The same for rho (B(p - c, q - c) - d).
inline double scaled_scale(double c, double d, double rho, double p, double q) {
  return std::fabs(rho) * (brier_scale(p - c, q - c) + std::fabs(d));
}

}  // namespace dpsurvey::oracle
