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

// Serial reference driver against the OpenMP driver on the Monte Carlo
// kernels that dominate experiment runtime.

#include <benchmark/benchmark.h>

#include <vector>

#include "dpsurvey/agents.hpp"
#include "dpsurvey/equilibrium.hpp"
#include "dpsurvey/priors.hpp"
#include "dpsurvey/privacy.hpp"

namespace dpsurvey {
namespace {

PriorSpec uniform_beta_prior() {
  PriorSpec prior;
  prior.mixing = BetaMixing{1.0, 1.0};
  prior.cost0 = UniformCost{0.0, 1.0};
  prior.cost1 = UniformCost{0.0, 1.0};
  return prior;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_ProbePayments(benchmark::State& state) {
  const PriorSpec prior = uniform_beta_prior();
  MechanismConfig config;
  config.n = 200;
  config.alpha = 0.1;
  config.epsilon = 0.115;
  config.beta = 0.1;
  config.p0 = 1.0 / 3.0;
  config.p1 = 2.0 / 3.0;
  const auto others = StrategyProfile::symmetric(Threshold{0.93, OffThreshold::Abstain});
  for (auto _ : state) {
    auto out = simulate_probe_payments(1, others, prior, config, 20000, 7, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_ProbePayments)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimulateSurveys(benchmark::State& state) {
  const PriorSpec prior = uniform_beta_prior();
  MechanismConfig config;
  config.n = 1000;
  config.alpha = 0.1;
  config.epsilon = 0.023;
  config.beta = 0.02;
  config.p0 = 1.0 / 3.0;
  config.p1 = 2.0 / 3.0;
  const auto profile = threshold_profile(0.92);
  for (auto _ : state) {
    auto out = simulate_surveys(prior, config, profile, NoiseMode::Sample, 500, 11, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_SimulateSurveys)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_DpAudit(benchmark::State& state) {
  const std::vector<Report> reports = {Report::One, Report::Zero, Report::One, Report::Zero};
  const AuditedMechanism mech = [](std::span<const Report> r, Rng& rng) {
    const auto sum = static_cast<std::int64_t>(report_bit(r[0]) + report_bit(r[1]) + report_bit(r[2]) +
                                               report_bit(r[3]));
    const PerturbedSum p = perturb_and_clamp(sum, 0, r.size(), NoiseSpec{0.5, NoiseMode::Sample}, rng);
    return AuditObservation{p.p_tilde, 0.0};
  };
  DpAuditOptions opt;
  opt.epsilon_claimed = 0.5;
  opt.trials = 100000;
  opt.exec = exec_of(state);
  for (auto _ : state) {
    auto rep = dp_audit(mech, reports, 1, Report::One, opt);
    benchmark::DoNotOptimize(rep.max_log_ratio);
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_DpAudit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace dpsurvey

BENCHMARK_MAIN();
