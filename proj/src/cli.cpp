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

#include "dpsurvey/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "dpsurvey/config.hpp"
#include "dpsurvey/equilibrium.hpp"
#include "dpsurvey/errors.hpp"
#include "dpsurvey/mechanism.hpp"
#include "dpsurvey/parallel.hpp"
#include "dpsurvey/privacy.hpp"

namespace dpsurvey {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

// JSON cannot hold infinities; they are written as null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass: return kExitOk;
    case Verdict::Fail: return kExitFail;
    case Verdict::Inconclusive: return kExitInconclusive;
  }
  return kExitFail;
}

Json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "config: cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--config", std::string("config: not valid JSON: ") + e.what());
  }
}

// CSV sink. Every row ends with the resolved survey parameters so records are
// self-describing.
class Csv {
 public:
  Csv(std::optional<std::string> path, std::vector<std::string> columns, std::vector<std::string> trailer)
      : path_(std::move(path)) {
    if (!path_) return;
    stream_.open(*path_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw ConfigError("output", "cannot open output file '" + *path_ + "'");
    columns.insert(columns.end(), trailer.begin(), trailer.end());
    write_row(columns);
  }

  bool enabled() const { return path_.has_value(); }

  void row(std::vector<std::string> cells, const std::vector<std::string>& trailer) {
    if (!path_) return;
    cells.insert(cells.end(), trailer.begin(), trailer.end());
    write_row(cells);
  }

  Json describe() const { return path_ ? Json(*path_) : Json(nullptr); }

 private:
  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) stream_ << (k ? "," : "") << cells[k];
    stream_ << '\n';
  }

  std::optional<std::string> path_;
  std::ofstream stream_;
};

std::string fmt(double x) { return format_double(x); }
std::string fmt(std::size_t x) { return std::to_string(x); }

const std::vector<std::string> kResolvedColumns = {"epsilon", "beta", "tau", "p0", "p1", "seed"};

std::vector<std::string> resolved_cells(const ResolvedSurvey& r, std::uint64_t seed) {
  return {fmt(r.epsilon), fmt(r.beta), fmt(r.tau()), fmt(r.posteriors.p0), fmt(r.posteriors.p1),
          std::to_string(seed)};
}

Json resolved_json(const ResolvedSurvey& r, const SurveySetup& s) {
  return {{"epsilon", r.epsilon},
          {"beta", r.beta},
          {"tau", r.tau()},
          {"tau_population", r.threshold.tau_population},
          {"tau_peer", r.threshold.tau_peer},
          {"p0", r.posteriors.p0},
          {"p1", r.posteriors.p1},
          {"n", s.n},
          {"alpha", s.alpha},
          {"delta", s.delta},
          {"seed", s.seed},
          {"posteriors", s.posteriors == PosteriorSource::Exact ? "exact" : "clamped"},
          {"clamp_payments", s.clamp_payments}};
}

Json lint_json(const SurveySetup& s, double epsilon) {
  const AccuracyLint lint = accuracy_lint(s.alpha, s.delta, epsilon, s.n);
  return {{"alpha_prime", lint.alpha_prime}, {"target", lint.target}, {"meets_target", lint.meets_target}};
}

const std::vector<std::string> kRecordColumns = {"trial",         "p_hat",       "p_tilde",
                                                 "abs_error",     "total_payment", "min_payment",
                                                 "max_payment",   "participants", "non_truthful"};

std::vector<std::string> record_cells(const TrialRecord& r) {
  return {fmt(r.trial),       fmt(r.p_hat),       fmt(r.p_tilde),      fmt(r.abs_error),
          fmt(r.total_payment), fmt(r.min_payment), fmt(r.max_payment), fmt(r.participants),
          fmt(r.non_truthful)};
}

Json strategy_json(const ExperimentConfig& cfg, double tau) { return to_json(cfg.strategy.resolve(tau)); }

int cmd_run(const ExperimentConfig& cfg, Csv& csv, Json& report) {
  const ResolvedSurvey survey = resolve(cfg.setup);
  const auto profile = StrategyProfile::symmetric(cfg.strategy.resolve(survey.tau()));
  const auto records = simulate_surveys(cfg.setup.prior, survey.mechanism, profile, cfg.noise, cfg.trials,
                                        purpose_seed(cfg.setup.seed, SeedPurpose::Simulation));
  const auto trailer = resolved_cells(survey, cfg.setup.seed);
  double err = 0.0;
  double pay = 0.0;
  double part = 0.0;
  for (const auto& r : records) {
    csv.row(record_cells(r), trailer);
    err += r.abs_error;
    pay += r.total_payment;
    part += static_cast<double>(r.participants);
  }
  const auto trials = static_cast<double>(std::max<std::size_t>(records.size(), 1));
  report["resolved"] = resolved_json(survey, cfg.setup);
  report["strategy"] = strategy_json(cfg, survey.tau());
  report["noise"] = cfg.noise == NoiseMode::Sample ? "laplace" : "disabled";
  report["trials"] = records.size();
  report["mean_abs_error"] = err / trials;
  report["mean_total_payment"] = pay / trials;
  report["mean_participants"] = part / trials;
  report["accuracy_lint"] = lint_json(cfg.setup, survey.epsilon);
  return kExitOk;
}

int cmd_posterior(const ExperimentConfig& cfg, Json& report) {
  const SurveySetup& s = cfg.setup;
  report["bit_marginal"] = bit_marginal(s.prior);
  report["p0"] = posterior_bit_prob(s.prior, 0);
  report["p1"] = posterior_bit_prob(s.prior, 1);
  report["seed"] = s.seed;
  if (s.n >= 2) {
    const double eps = s.epsilon ? *s.epsilon : epsilon_rule(s.alpha, s.delta, s.n);
    const NoiseSpec noise{eps, NoiseMode::Sample};
    const std::uint64_t seed = purpose_seed(s.seed, SeedPurpose::Posterior);
    report["clamped"] = {
        {"n", s.n},
        {"epsilon", eps},
        {"samples", s.posterior_samples},
        {"p0", posterior_clamped_mean(s.prior, 0, s.n, noise, s.posterior_samples, seed)},
        {"p1", posterior_clamped_mean(s.prior, 1, s.n, noise, s.posterior_samples, derive_seed(seed, 1))}};
  }
  return kExitOk;
}

int cmd_threshold(const ExperimentConfig& cfg, Json& report) {
  const SurveySetup& s = cfg.setup;
  const std::uint64_t seed = purpose_seed(s.seed, SeedPurpose::Threshold);
  const CostThreshold at_delta = cost_threshold(s.prior, s.alpha, s.delta, s.n, s.threshold_trials, seed);
  const CostThreshold at_half = cost_threshold(s.prior, s.alpha, s.delta / 2.0, s.n, s.threshold_trials, seed);
  report["n"] = s.n;
  report["alpha"] = s.alpha;
  report["delta"] = s.delta;
  report["seed"] = s.seed;
  report["tau"] = at_delta.tau;
  report["tau_population"] = at_delta.tau_population;
  report["tau_peer"] = at_delta.tau_peer;
  report["equilibrium_tau"] = at_half.tau;  // at delta / 2
  report["grid_step"] = kThresholdGridStep;
  return kExitOk;
}

// Range of the scaled score over peer estimates in [0, 1] at fixed prediction q.
AuditAxis payment_axis(const ScoringParams& params, double q) {
  const double vertex = std::clamp(q, 0.0, 1.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x : {0.0, 1.0, vertex}) {
    const double v = scaled_score(params, x, q);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi - lo > 1e-12)) {
    lo -= 1.0;
    hi += 1.0;
  }
  return {lo, hi};
}

int cmd_audit_dp(const ExperimentConfig& cfg, Csv& csv, Json& report) {
  const ResolvedSurvey survey = resolve(cfg.setup);
  const DpAuditSettings& a = cfg.audit;
  const MechanismConfig mc = survey.mechanism;
  MechanismTestHooks hooks;
  hooks.disable_noise = a.mechanism == AuditMechanism::NoNoise;

  // The other agent whose payment joins the observable.
  const std::size_t witness = a.index == 0 ? 1 : 0;
  DpAuditOptions opt;
  opt.epsilon_claimed = survey.epsilon;
  opt.trials = cfg.trials;
  opt.bins = a.bins;
  opt.tolerance = a.tolerance;
  opt.seed = purpose_seed(cfg.setup.seed, SeedPurpose::Simulation);
  opt.axes = {AuditAxis{0.0, 1.0}};
  const bool with_payment = a.observable == AuditObservable::EstimateAndPayment;
  if (with_payment) {
    const Report r = a.reports[witness];
    opt.axes.push_back(participates(r) ? payment_axis(mc.scoring(), mc.scoring().prediction(report_bit(r)))
                                       : AuditAxis{-1.0, 1.0});
  }
  const AuditedMechanism mech = [&](std::span<const Report> reports, Rng& rng) {
    const MechanismOutcome o = run_with_test_hooks(mc, reports, rng, hooks);
    return AuditObservation{o.estimate, with_payment ? o.payments[witness] : 0.0};
  };
  const DpAuditReport rep = dp_audit(mech, a.reports, a.index, a.flipped, opt);

  const auto trailer = resolved_cells(survey, cfg.setup.seed);
  for (std::size_t c = 0; c < rep.counts_a.size(); ++c) {
    const double ca = static_cast<double>(rep.counts_a[c]);
    const double cb = static_cast<double>(rep.counts_b[c]);
    const double ratio = ca > 0 && cb > 0 ? std::fabs(std::log(ca / cb)) : std::numeric_limits<double>::infinity();
    csv.row({fmt(c), std::to_string(rep.counts_a[c]), std::to_string(rep.counts_b[c]), fmt(ratio)}, trailer);
  }
  report["resolved"] = resolved_json(survey, cfg.setup);
  report["mechanism"] = a.mechanism == AuditMechanism::Survey ? "survey" : "no-noise";
  report["observable"] = with_payment ? "estimate_and_payment" : "estimate";
  report["epsilon_claimed"] = rep.epsilon_claimed;
  report["max_log_ratio"] = number_or_null(rep.max_log_ratio);
  report["bins"] = rep.bins;
  report["trials"] = rep.trials;
  report["tolerance"] = rep.tolerance;
  report["retained_bins"] = rep.retained_bins;
  report["support_mismatch"] = rep.support_mismatch;
  report["verdict"] = to_string(rep.verdict);
  return exit_code(rep.verdict);
}

Json utility_json(const UtilityEstimate& u) {
  return {{"mean_payment", u.mean_payment},
          {"payment_ci_halfwidth", u.payment_ci_halfwidth},
          {"privacy_cost", u.privacy_cost},
          {"utility_lower_bound", u.utility_lower_bound},
          {"mean_peer_estimate", u.mean_peer_estimate},
          {"trials", u.trials}};
}

int cmd_audit_equilibrium(const ExperimentConfig& cfg, Csv& csv, Json& report) {
  const EquilibriumAuditReport rep = best_response_audit(cfg.setup, cfg.cost_model, cfg.trials);
  const auto trailer = resolved_cells(rep.survey, cfg.setup.seed);
  for (const auto& b : rep.bits) {
    for (std::size_t t = 0; t < b.samples.size(); ++t) {
      const auto& s = b.samples[t];
      csv.row({std::to_string(b.bit), fmt(t), fmt(s.truth), fmt(s.lie), fmt(s.abstain), fmt(s.peer_estimate)},
              trailer);
    }
  }
  Json bits = Json::array();
  for (const auto& b : rep.bits) {
    bits.push_back({{"bit", b.bit},
                    {"truth", utility_json(b.truth)},
                    {"lie", utility_json(b.lie)},
                    {"abstain", utility_json(b.abstain)},
                    {"peer_deviation", b.peer_deviation},
                    {"truth_ge_beta", to_string(b.truth_ge_beta)},
                    {"lie_le_zero", to_string(b.lie_le_zero)}});
  }
  report["resolved"] = resolved_json(rep.survey, cfg.setup);
  report["cost_model"] = {{"kind", cfg.cost_model.kind == CostModelKind::Linear ? "linear" : "chen"},
                          {"eta", cfg.cost_model.eta}};
  report["trials"] = rep.trials;
  report["probe_cost"] = rep.probe_cost;
  report["beta"] = rep.survey.beta;
  report["tau"] = rep.survey.tau();
  report["truth_payment_mean"] = rep.truth_payment_mean;
  report["truth_payment_ci"] = rep.truth_payment_ci;
  report["lie_payment_mean"] = rep.lie_payment_mean;
  report["lie_payment_ci"] = rep.lie_payment_ci;
  report["abstain_utility_bound"] = rep.abstain_utility_bound;
  report["verdicts"] = {{"truth_ge_beta", to_string(rep.truth_ge_beta)},
                        {"lie_le_zero", to_string(rep.lie_le_zero)},
                        {"truth_dominates", to_string(rep.truth_dominates)},
                        {"beta_margin", to_string(rep.beta_margin)}};
  report["per_bit"] = bits;
  report["accuracy_lint"] = lint_json(cfg.setup, rep.survey.epsilon);
  return exit_code(rep.overall());
}

int cmd_accuracy(const ExperimentConfig& cfg, Csv& csv, Json& report) {
  const ResolvedSurvey survey = resolve(cfg.setup);
  const auto profile = StrategyProfile::symmetric(cfg.strategy.resolve(survey.tau()));
  const AccuracyReport rep = accuracy_experiment(survey, cfg.setup, profile, cfg.trials, cfg.noise);
  const auto trailer = resolved_cells(survey, cfg.setup.seed);
  double non_truthful = 0.0;
  for (const auto& r : rep.records) {
    auto cells = record_cells(r);
    cells.push_back(r.abs_error <= rep.alpha_prime ? "1" : "0");
    csv.row(std::move(cells), trailer);
    non_truthful += static_cast<double>(r.non_truthful);
  }
  report["resolved"] = resolved_json(survey, cfg.setup);
  report["strategy"] = strategy_json(cfg, survey.tau());
  report["noise"] = cfg.noise == NoiseMode::Sample ? "laplace" : "disabled";
  report["alpha_prime"] = rep.alpha_prime;
  report["success_fraction"] = rep.success_fraction;
  report["required_fraction"] = rep.required_fraction;
  report["trials"] = rep.trials;
  report["delta"] = rep.delta;
  report["mean_non_truthful"] = non_truthful / static_cast<double>(rep.trials);
  report["verdict"] = to_string(rep.verdict);
  report["accuracy_lint"] = lint_json(cfg.setup, survey.epsilon);
  return exit_code(rep.verdict);
}

int cmd_cost_scaling(const ExperimentConfig& cfg, Csv& csv, Json& report) {
  const CostScalingReport rep = cost_scaling_experiment(cfg.setup, cfg.ns, cfg.trials);
  Json rows = Json::array();
  Verdict verdict = Verdict::Pass;
  for (const auto& row : rep.rows) {
    const std::vector<std::string> trailer = {fmt(row.epsilon), fmt(row.beta), fmt(row.tau),
                                              fmt(row.p0),      fmt(row.p1),   std::to_string(cfg.setup.seed)};
    for (const auto& r : row.records) {
      auto cells = record_cells(r);
      cells.insert(cells.begin(), fmt(row.n));
      csv.row(std::move(cells), trailer);
    }
    rows.push_back({{"n", row.n},
                    {"epsilon", row.epsilon},
                    {"beta", row.beta},
                    {"tau", row.tau},
                    {"p0", row.p0},
                    {"p1", row.p1},
                    {"total_payment_mean", row.total_payment_mean},
                    {"total_payment_se", row.total_payment_se},
                    {"cost_bound", row.cost_bound},
                    {"closed_form_bound", row.closed_form_bound},
                    {"within_bound", to_string(row.within_bound)}});
    verdict = worst(verdict, row.within_bound);
  }
  const Verdict slope_ok =
      rep.loglog_slope >= -1.2 && rep.loglog_slope <= -0.8 ? Verdict::Pass : Verdict::Fail;
  verdict = worst(verdict, slope_ok);
  report["rows"] = rows;
  report["loglog_slope"] = rep.loglog_slope;
  report["slope_verdict"] = to_string(slope_ok);
  report["first_last_ratio"] = rep.first_last_ratio;
  report["trials"] = cfg.trials;
  report["alpha"] = cfg.setup.alpha;
  report["delta"] = cfg.setup.delta;
  report["seed"] = cfg.setup.seed;
  report["verdict"] = to_string(verdict);
  return exit_code(verdict);
}

std::vector<std::string> csv_columns(const std::string& command) {
  if (command == "audit-dp") return {"cell", "count_a", "count_b", "abs_log_ratio"};
  if (command == "audit-equilibrium") {
    return {"bit", "trial", "truth_payment", "lie_payment", "abstain_payment", "peer_estimate"};
  }
  std::vector<std::string> cols = kRecordColumns;
  if (command == "accuracy") cols.push_back("within_alpha_prime");
  if (command == "cost-scaling") cols.insert(cols.begin(), "n");
  return cols;
}

int execute(const std::string& command, const Options& opts, std::ostream& out) {
  ExperimentConfig cfg = parse_experiment(read_config(opts.config_path), command);
  if (opts.seed) cfg.setup.seed = *opts.seed;
  std::optional<std::string> csv_path = opts.out ? opts.out : cfg.output;
  const bool writes_csv = command != "posterior" && command != "threshold";
  Csv csv(writes_csv ? csv_path : std::nullopt, csv_columns(command), kResolvedColumns);

  Json report;
  report["command"] = command;
  int code = kExitOk;
  if (command == "run") {
    code = cmd_run(cfg, csv, report);
  } else if (command == "posterior") {
    code = cmd_posterior(cfg, report);
  } else if (command == "threshold") {
    code = cmd_threshold(cfg, report);
  } else if (command == "audit-dp") {
    code = cmd_audit_dp(cfg, csv, report);
  } else if (command == "audit-equilibrium") {
    code = cmd_audit_equilibrium(cfg, csv, report);
  } else if (command == "accuracy") {
    code = cmd_accuracy(cfg, csv, report);
  } else {
    code = cmd_cost_scaling(cfg, csv, report);
  }
  report["seed"] = cfg.setup.seed;
  report["csv"] = csv.describe();
  out << report.dump(2) << '\n';
  return code;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private peer-prediction survey simulator", "dpsurvey"};
  app.require_subcommand(1);
  Options opts;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_path;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "Simulate surveys and write one CSV row per trial"},
      {"posterior", "Print the posteriors p0 and p1"},
      {"threshold", "Compute the cost threshold"},
      {"audit-dp", "Empirical differential-privacy audit"},
      {"audit-equilibrium", "Best-response audit of threshold play"},
      {"accuracy", "Accuracy of the published estimate"},
      {"cost-scaling", "Total payment as the population grows"}};
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  std::vector<CLI::Option*> thread_opts;
  std::vector<CLI::Option*> out_opts;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", seed, "Override the config seed"));
    thread_opts.push_back(sub->add_option("--threads", threads, "Cap worker threads")->check(CLI::PositiveNumber));
    out_opts.push_back(sub->add_option("--out", out_path, "CSV output path"));
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::string command;
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (!subs[k]->parsed()) continue;
    command = commands[k].first;
    if (seed_opts[k]->count()) opts.seed = seed;
    if (thread_opts[k]->count()) opts.threads = threads;
    if (out_opts[k]->count()) opts.out = out_path;
  }

  set_thread_limit(opts.threads.value_or(0));
  int code = kExitUsage;
  try {
    code = execute(command, opts, out);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    code = kExitUsage;
  } catch (const PreconditionError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    code = kExitUsage;
  } catch (const InsufficientDataError& e) {
    err << "inconclusive: " << e.what() << '\n';
    code = kExitInconclusive;
  }
  set_thread_limit(0);
  return code;
}

}  // namespace dpsurvey
