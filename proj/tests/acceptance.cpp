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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. A criterion that overruns its time
// budget fails too.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "dpsurvey/agents.hpp"
#include "dpsurvey/config.hpp"
#include "dpsurvey/equilibrium.hpp"
#include "dpsurvey/mechanism.hpp"
#include "dpsurvey/privacy.hpp"
#include "dpsurvey/scoring.hpp"
#include "oracles.hpp"

namespace dpsurvey {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::vector<double> unit_grid(int steps) {
  std::vector<double> g;
  for (int k = 0; k <= steps; ++k) g.push_back(static_cast<double>(k) / steps);
  return g;
}

PriorSpec uniform_prior() {
  PriorSpec p;
  p.mixing = BetaMixing{1.0, 1.0};
  p.cost0 = UniformCost{};
  p.cost1 = UniformCost{};
  return p;
}

SurveySetup equilibrium_setup() {
  SurveySetup s;
  s.prior = uniform_prior();
  s.n = 200;
  s.alpha = 0.1;
  s.delta = 0.1;
  s.seed = 2026;
  return s;
}

Outcome scoring_identities() {
  const std::vector<ScoringParams> params = {
      scoring_params(1.0 / 3.0, 2.0 / 3.0, 0.1, 0.1),
      scoring_params(0.3, 0.7, 0.1, 1.0),
      scoring_params(0.8, 0.15, 0.2, 3.5),
  };
  const auto grid = unit_grid(100);
  double worst_gap = 0.0;
  double worst_lip = 0.0;
  double worst_exp = 0.0;
  for (double p : grid) {
    for (double q : grid) {
      const double a = p * basic_brier(1, q);
      const double b = (1 - p) * basic_brier(0, q);
      const double scale = std::max(std::fabs(a) + std::fabs(b) + 2 + 2 * q * q, oracle::brier_scale(p, q));
      worst_exp = std::max(worst_exp, oracle::scaled_ulps(a + b, b_score(p, q), scale));
    }
  }
  for (const auto& s : params) {
    for (double p : grid) {
      for (double q : grid) {
        const double gap = scaled_score(s, p, p) - scaled_score(s, p, q);
        const double gap_scale = std::max(oracle::scaled_scale(s.c, s.d, s.rho, p, p),
                                          oracle::scaled_scale(s.c, s.d, s.rho, p, q));
        worst_gap = std::max(worst_gap, oracle::scaled_ulps(gap, 2 * s.rho * (p - q) * (p - q), gap_scale));
        const double lambda = lipschitz_constant(s, q);
        for (double pp : grid) {
          const double lhs = std::fabs(scaled_score(s, p, q) - scaled_score(s, pp, q));
          const double lip_scale = std::max(oracle::scaled_scale(s.c, s.d, s.rho, p, q),
                                            oracle::scaled_scale(s.c, s.d, s.rho, pp, q));
          worst_lip = std::max(worst_lip, oracle::scaled_ulps(lhs, lambda * std::fabs(p - pp), lip_scale));
        }
      }
    }
  }
  const bool ok = worst_gap <= 4 && worst_lip <= 4 && worst_exp <= 4;
  return {ok, "max ulps gap=" + num(worst_gap) + " lipschitz=" + num(worst_lip) + " expectation=" + num(worst_exp)};
}

Outcome score_inequalities() {
  std::mt19937_64 gen(20261016);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int tuples = 0;
  long checks = 0;
  double worst = -1.0;  // largest violation; <= 1e-9 passes
  while (tuples < 100) {
    const double p0 = unit(gen);
    const double p1 = unit(gen);
    const double gap = std::fabs(p1 - p0);
    if (gap < 0.02) continue;
    const double alpha = unit(gen) * gap / 2 * 0.999;
    const double beta = 0.01 + 10 * unit(gen);
    const double dev = 0.5 * unit(gen);
    const ScoringParams s = scoring_params(p0, p1, alpha, beta);
    ++tuples;
    for (int bit = 0; bit <= 1; ++bit) {
      const double pb = s.prediction(bit);
      const double other = s.prediction(1 - bit);
      for (int k = 1; k < 200; ++k) {
        const double pp = pb - alpha + 2 * alpha * k / 200.0;
        worst = std::max(worst, scaled_score(s, pp, other));
        worst = std::max(worst, beta - scaled_score(s, pp, pb));
        const double pd = pb - dev + 2 * dev * k / 200.0;
        worst = std::max(worst, scaled_score(s, pd, pb) - (beta + 2 * s.rho * (alpha + dev) * gap));
        checks += 3;
      }
    }
  }
  return {worst <= 1e-9, num(tuples) + " tuples, " + num(static_cast<double>(checks)) +
                             " checks, worst excess " + num(worst)};
}

Outcome laplace_tails() {
  constexpr std::size_t kDraws = 1000000;
  Rng rng = make_rng(7, 0);
  std::size_t ge[4] = {0, 0, 0, 0};
  for (std::size_t k = 0; k < kDraws; ++k) {
    const double x = laplace_sample(1.0, rng);
    for (int t = 1; t <= 3; ++t) ge[t] += std::fabs(x) >= t ? 1 : 0;
  }
  bool ok = true;
  std::string detail;
  for (int t = 1; t <= 3; ++t) {
    const double expected = std::exp(-t);
    const double freq = static_cast<double>(ge[t]) / kDraws;
    ok = ok && std::fabs(freq - expected) <= oracle::three_sigma(expected, kDraws);
    detail += "t=" + std::to_string(t) + ": " + num(freq) + " vs " + num(expected) + (t < 3 ? ", " : "");
  }
  return {ok, detail};
}

Outcome dp_audits() {
  MechanismConfig c;
  c.n = 4;
  c.alpha = 0.1;
  c.beta = 0.1;
  c.epsilon = 0.5;
  c.p0 = 1.0 / 3.0;
  c.p1 = 2.0 / 3.0;
  const std::vector<Report> reports = {Report::One, Report::Zero, Report::One, Report::Zero};
  auto mechanism = [&](bool noise) -> AuditedMechanism {
    return [&c, noise](std::span<const Report> r, Rng& rng) {
      MechanismTestHooks h;
      h.disable_noise = !noise;
      return AuditObservation{run_with_test_hooks(c, r, rng, h).estimate, 0.0};
    };
  };
  DpAuditOptions opt;
  opt.epsilon_claimed = 0.5;
  opt.trials = 1000000;
  opt.bins = 20;
  const DpAuditReport laplace = dp_audit(mechanism(true), reports, 1, Report::One, opt);
  const DpAuditReport raw = dp_audit(mechanism(false), reports, 1, Report::One, opt);
  const bool ok = laplace.verdict == Verdict::Pass && laplace.max_log_ratio <= 0.55 && raw.verdict == Verdict::Fail;
  return {ok, "laplace max log-ratio " + num(laplace.max_log_ratio) + " (" + std::string(to_string(laplace.verdict)) +
                  "), no-noise " + std::string(to_string(raw.verdict))};
}

Outcome equilibrium_audit(CostModelKind kind) {
  SurveySetup setup = equilibrium_setup();
  setup.beta_rule = kind;
  const EquilibriumAuditReport rep = best_response_audit(setup, CostModel{kind, 1.0}, 100000);
  const bool ok = rep.truth_ge_beta == Verdict::Pass && rep.lie_le_zero == Verdict::Pass &&
                  rep.beta_margin == Verdict::Pass && rep.abstain_utility_bound <= 0.0 &&
                  (kind == CostModelKind::Linear || rep.survey.epsilon <= 1.0);
  return {ok, "eps=" + num(rep.survey.epsilon) + " tau=" + num(rep.survey.tau()) + " beta=" + num(rep.survey.beta) +
                  " truth=" + num(rep.truth_payment_mean) + "+-" + num(rep.truth_payment_ci) +
                  " lie=" + num(rep.lie_payment_mean) + "+-" + num(rep.lie_payment_ci) +
                  " abstain<=" + num(rep.abstain_utility_bound) + " margin=" + std::string(to_string(rep.beta_margin))};
}

Outcome accuracy() {
  SurveySetup setup = equilibrium_setup();
  setup.n = 1000;
  const ResolvedSurvey survey = resolve(setup);
  const AccuracyReport rep = accuracy_experiment(survey, setup, threshold_profile(survey.tau()), 1000);
  return {rep.verdict == Verdict::Pass, "alpha'=" + num(rep.alpha_prime) + " success " + num(rep.success_fraction) +
                                            " >= " + num(rep.required_fraction)};
}

Outcome cost_scaling() {
  SurveySetup setup = equilibrium_setup();
  const std::vector<std::size_t> ns = {500, 5000};
  const CostScalingReport rep = cost_scaling_experiment(setup, ns, 1000);
  bool ok = rep.first_last_ratio >= 5 && rep.first_last_ratio <= 20 && rep.loglog_slope >= -1.2 &&
            rep.loglog_slope <= -0.8;
  std::string detail = "ratio " + num(rep.first_last_ratio) + ", slope " + num(rep.loglog_slope);
  for (const auto& row : rep.rows) {
    ok = ok && row.within_bound == Verdict::Pass;
    detail += ", n=" + std::to_string(row.n) + " mean " + num(row.total_payment_mean) + " <= " + num(row.cost_bound);
  }
  return {ok, detail};
}

struct Spawned {
  int code = -1;
  std::string out;
};

Spawned spawn(const std::vector<std::string>& args) {
  std::string cmd = DPSURVEY_CLI_PATH;
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " 2>/dev/null";
  Spawned s;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return s;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) s.out.append(buf, got);
  const int status = pclose(pipe);
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dpsurvey_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Json doc = {{"prior", to_json(uniform_prior())}, {"n", 200}, {"alpha", 0.1}, {"delta", 0.1},
              {"trials", 2000}, {"seed", 99}};
  const std::string cfg = (dir / "config.json").string();
  std::ofstream(cfg) << doc.dump(2);
  const std::string csv = (dir / "out.csv").string();

  bool ok = true;
  std::string detail;
  for (const std::string command : {"run", "audit-equilibrium", "accuracy"}) {
    std::vector<std::string> out;
    std::vector<std::string> files;
    for (const char* threads : {"1", "1", "4"}) {
      const Spawned s = spawn({command, "--config", cfg, "--out", csv, "--threads", threads});
      ok = ok && s.code == 0 && !s.out.empty();
      out.push_back(s.out);
      files.push_back(slurp(csv));
    }
    const bool same = out[0] == out[1] && out[1] == out[2] && files[0] == files[1] && files[1] == files[2] &&
                      !files[0].empty();
    ok = ok && same;
    detail += command + (same ? " identical" : " DIFFERS") + (command == "accuracy" ? "" : ", ");
  }
  fs::remove_all(dir);
  return {ok, detail + " (2 repeats + 4 threads)"};
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace
}  // namespace dpsurvey

int main() {
  using namespace dpsurvey;
  const std::vector<Criterion> criteria = {
      {1, "scoring identities", 1.0, scoring_identities},
      {2, "score inequalities", 10.0, score_inequalities},
      {3, "laplace tails", 5.0, laplace_tails},
      {4, "dp audit", 30.0, dp_audits},
      {5, "equilibrium audit (linear)", 120.0, [] { return equilibrium_audit(CostModelKind::Linear); }},
      {6, "equilibrium audit (chen)", 120.0, [] { return equilibrium_audit(CostModelKind::Chen); }},
      {7, "accuracy", 120.0, accuracy},
      {8, "cost scaling", 300.0, cost_scaling},
      {9, "determinism", 60.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << o.detail
              << "; " << num(secs) << " s of " << num(c.budget_s) << " s" << (in_time ? "" : ", over budget")
              << "]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
