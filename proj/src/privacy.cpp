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

#include "dpsurvey/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "dpsurvey/errors.hpp"

namespace dpsurvey {

void NoiseSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw PreconditionError("noise epsilon must be positive and finite");
  }
}

double laplace_from_uniform(double u, double scale) {
  // Adding 0.0 folds -0 into +0 so the median maps to a clean zero.
  if (u < 0.5) return scale * std::log(2.0 * u) + 0.0;
  return -scale * std::log(2.0 * (1.0 - u)) + 0.0;
}

double laplace_sample(double scale, Rng& rng) {
  if (!(scale > 0.0)) throw PreconditionError("laplace_sample: scale must be positive");
  return laplace_from_uniform(uniform_open01(rng), scale);
}

double laplace_cdf(double x, double location, double scale) {
  const double z = (x - location) / scale;
  if (z < 0.0) return 0.5 * std::exp(z);
  return 1.0 - 0.5 * std::exp(-z);
}

PerturbedSum clamp_noisy_sum(double b_bar, int own_report_bit, std::size_t n) {
  if (n < 2) throw PreconditionError("clamp_noisy_sum: n must be at least 2");
  PerturbedSum out;
  out.b_bar = b_bar;
  out.p_tilde = clamp_unit(b_bar / static_cast<double>(n));
  out.p_tilde_minus_i = clamp_unit((b_bar - own_report_bit) / static_cast<double>(n - 1));
  return out;
}

PerturbedSum perturb_and_clamp(std::int64_t bhat_sum, int own_report_bit, std::size_t n,
                               const NoiseSpec& noise, Rng& rng) {
  if (bhat_sum < 0 || static_cast<std::size_t>(bhat_sum) > n) {
    throw PreconditionError("perturb_and_clamp: bhat_sum must lie in [0, n]");
  }
  noise.validate();
  const double draw = noise.mode == NoiseMode::Sample ? laplace_sample(noise.scale(), rng) : 0.0;
  return clamp_noisy_sum(static_cast<double>(bhat_sum) + draw, own_report_bit, n);
}

namespace {

std::size_t axis_cell(double x, const AuditAxis& axis, std::size_t bins) {
  if (!(x > axis.lo)) return 0;  // also routes NaN to the first cell
  const double pos = (x - axis.lo) / (axis.hi - axis.lo) * static_cast<double>(bins);
  if (pos >= static_cast<double>(bins)) return bins - 1;
  return static_cast<std::size_t>(pos);
}

std::uint32_t observation_cell(const AuditObservation& obs, const DpAuditOptions& options) {
  std::size_t cell = 0;
  for (std::size_t d = 0; d < options.axes.size(); ++d) {
    cell = cell * options.bins + axis_cell(obs[d], options.axes[d], options.bins);
  }
  return static_cast<std::uint32_t>(cell);
}

std::size_t cell_count(const DpAuditOptions& options) {
  std::size_t cells = 1;
  for (std::size_t d = 0; d < options.axes.size(); ++d) cells *= options.bins;
  return cells;
}

}  // namespace

DpAuditReport compare_histograms(std::span<const std::uint64_t> counts_a,
                                 std::span<const std::uint64_t> counts_b,
                                 const DpAuditOptions& options) {
  if (counts_a.size() != counts_b.size()) {
    throw PreconditionError("compare_histograms: histogram sizes differ");
  }
  DpAuditReport report;
  report.epsilon_claimed = options.epsilon_claimed;
  report.bins = options.bins;
  report.trials = options.trials;
  report.tolerance = options.tolerance;

  double max_ratio = 0.0;
  for (std::size_t k = 0; k < counts_a.size(); ++k) {
    const auto a = static_cast<double>(counts_a[k]);
    const auto b = static_cast<double>(counts_b[k]);
    if (a >= options.min_count && b >= options.min_count) {
      ++report.retained_bins;
      max_ratio = std::max(max_ratio, std::fabs(std::log(a / b)));
    } else if ((a >= options.min_count && b == 0.0) || (b >= options.min_count && a == 0.0)) {
      report.support_mismatch = true;
    }
  }
  if (report.support_mismatch) {
    report.max_log_ratio = std::numeric_limits<double>::infinity();
  } else if (report.retained_bins == 0) {
    throw InsufficientDataError("dp_audit: every histogram cell fell below the count floor");
  } else {
    report.max_log_ratio = max_ratio;
  }
  report.verdict = report.max_log_ratio <= options.epsilon_claimed + options.tolerance
                       ? Verdict::Pass
                       : Verdict::Fail;
  return report;
}

DpAuditReport dp_audit(const AuditedMechanism& mech, std::span<const Report> reports,
                       std::size_t i, Report flipped, const DpAuditOptions& options) {
  if (options.trials < 100000) throw PreconditionError("dp_audit: trials must be at least 1e5");
  if (options.bins < 2) throw PreconditionError("dp_audit: bins must be at least 2");
  if (options.axes.empty() || options.axes.size() > 2) {
    throw PreconditionError("dp_audit: observable must have 1 or 2 axes");
  }
  for (const auto& axis : options.axes) {
    if (!(axis.hi > axis.lo)) throw PreconditionError("dp_audit: empty axis range");
  }
  if (i >= reports.size()) throw PreconditionError("dp_audit: index out of range");
  if (reports[i] == flipped) {
    throw PreconditionError("dp_audit: neighbouring inputs must differ at index i");
  }
  if (!(options.epsilon_claimed > 0.0)) {
    throw PreconditionError("dp_audit: epsilon_claimed must be positive");
  }

  const std::vector<Report> input_a(reports.begin(), reports.end());
  std::vector<Report> input_b = input_a;
  input_b[i] = flipped;

  using CellPair = std::pair<std::uint32_t, std::uint32_t>;
  const auto cells = map_trials<CellPair>(options.trials, options.exec, [&](std::size_t t) {
    Rng rng_a = make_rng(options.seed, 2 * t);
    Rng rng_b = make_rng(options.seed, 2 * t + 1);
    return CellPair{observation_cell(mech(input_a, rng_a), options),
                    observation_cell(mech(input_b, rng_b), options)};
  });

  std::vector<std::uint64_t> counts_a(cell_count(options), 0);
  std::vector<std::uint64_t> counts_b(cell_count(options), 0);
  for (const auto& [a, b] : cells) {
    ++counts_a[a];
    ++counts_b[b];
  }
  DpAuditReport report = compare_histograms(counts_a, counts_b, options);
  report.counts_a = std::move(counts_a);
  report.counts_b = std::move(counts_b);
  return report;
}

}  // namespace dpsurvey
