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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dpsurvey/parallel.hpp"
#include "dpsurvey/report.hpp"
#include "dpsurvey/rng.hpp"
#include "dpsurvey/stats.hpp"

namespace dpsurvey {

enum class NoiseMode { Sample, Disabled };

// Laplace noise with scale 1/epsilon on the reported sum. Disabled injects
// exactly zero and exists only for exact unit tests.
struct NoiseSpec {
  double epsilon = 1.0;
  NoiseMode mode = NoiseMode::Sample;

  double scale() const { return 1.0 / epsilon; }
  void validate() const;
};

// Inverse CDF of the zero-mean Laplace distribution evaluated at u in (0, 1).
double laplace_from_uniform(double u, double scale);

// One Laplace(0, scale) draw; consumes exactly one 64-bit output of rng.
double laplace_sample(double scale, Rng& rng);

// P[X <= x] for X ~ Laplace(location, scale).
double laplace_cdf(double x, double location, double scale);

inline double clamp_unit(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

struct PerturbedSum {
  double p_tilde = 0.0;          // clamp(b_bar / n)
  double p_tilde_minus_i = 0.0;  // clamp((b_bar - own) / (n - 1))
  double b_bar = 0.0;            // noisy sum
};

// Deterministic clamping step given the noisy sum.
PerturbedSum clamp_noisy_sum(double b_bar, int own_report_bit, std::size_t n);

// b_bar = bhat_sum + Laplace(1/epsilon) (one shared draw), then clamping.
PerturbedSum perturb_and_clamp(std::int64_t bhat_sum, int own_report_bit, std::size_t n,
                               const NoiseSpec& noise, Rng& rng);

// ---------------------------------------------------------------------------
// Empirical differential-privacy audit.
//
// The audited mechanism maps a report vector to a 1- or 2-dimensional
// observable. Both neighbouring inputs are run `trials` times on independent
// streams, the observables are histogrammed into equal-width cells over the
// configured axes (values outside an axis land in its end cells), and the
// largest |log count ratio| over well-populated cells is compared with the
// claimed epsilon.
//
// A cell is retained when both counts reach `min_count`. A cell where one
// side reaches `min_count` while the other is empty has an unbounded ratio;
// the report then carries max_log_ratio = +inf and a Fail verdict.
// ---------------------------------------------------------------------------

using AuditObservation = std::array<double, 2>;
using AuditedMechanism = std::function<AuditObservation(std::span<const Report>, Rng&)>;

struct AuditAxis {
  double lo = 0.0;
  double hi = 1.0;
};

struct DpAuditOptions {
  double epsilon_claimed = 1.0;
  std::size_t trials = 100000;
  std::size_t bins = 20;  // cells per axis
  std::vector<AuditAxis> axes = {AuditAxis{}};
  double tolerance = 0.05;
  double min_count = 50.0;
  std::uint64_t seed = 0;
  Execution exec = Execution::Parallel;
};

struct DpAuditReport {
  double epsilon_claimed = 0.0;
  double max_log_ratio = 0.0;
  std::size_t bins = 0;
  std::size_t trials = 0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Fail;
  std::size_t retained_bins = 0;
  bool support_mismatch = false;
  // Cell counts for both inputs; filled by dp_audit only.
  std::vector<std::uint64_t> counts_a;
  std::vector<std::uint64_t> counts_b;
};

// Runs mech on `reports` and on the neighbour whose entry i is replaced by
// `flipped`. Requires trials >= 1e5, bins >= 2, reports[i] != flipped.
// Throws InsufficientDataError when no cell survives the count floor.
DpAuditReport dp_audit(const AuditedMechanism& mech, std::span<const Report> reports,
                       std::size_t i, Report flipped, const DpAuditOptions& options);

// Histogram-ratio core shared by dp_audit; exposed for tests. Counts are
// indexed identically for both inputs.
DpAuditReport compare_histograms(std::span<const std::uint64_t> counts_a,
                                 std::span<const std::uint64_t> counts_b,
                                 const DpAuditOptions& options);

}  // namespace dpsurvey
