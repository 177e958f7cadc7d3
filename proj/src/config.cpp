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

#include "dpsurvey/config.hpp"

#include <cmath>
#include <string_view>

#include "dpsurvey/errors.hpp"

namespace dpsurvey {

namespace {

std::string join(const std::string& parent, std::string_view child) {
  return parent.empty() ? std::string(child) : parent + "." + std::string(child);
}

const Json& require(const Json& j, const std::string& parent, std::string_view name) {
  const std::string key = join(parent, name);
  if (!j.is_object()) throw ConfigError(parent, "config: '" + parent + "' must be an object");
  const auto it = j.find(name);
  if (it == j.end()) throw ConfigError(key, "config: missing key '" + key + "'");
  return *it;
}

bool has(const Json& j, std::string_view name) { return j.is_object() && j.contains(name); }

double as_number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "config: '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(key, "config: '" + key + "' must be finite");
  return x;
}

double number(const Json& j, const std::string& parent, std::string_view name) {
  return as_number(require(j, parent, name), join(parent, name));
}

double number_or(const Json& j, const std::string& parent, std::string_view name, double fallback) {
  return has(j, name) ? number(j, parent, name) : fallback;
}

std::uint64_t as_count(const Json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(key, "config: '" + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::uint64_t count(const Json& j, const std::string& parent, std::string_view name) {
  return as_count(require(j, parent, name), join(parent, name));
}

std::string text(const Json& j, const std::string& parent, std::string_view name) {
  const Json& v = require(j, parent, name);
  if (!v.is_string()) throw ConfigError(join(parent, name), "config: '" + join(parent, name) + "' must be a string");
  return v.get<std::string>();
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError(key, "config: unsupported value '" + value + "' for '" + key + "'");
}

// Number or the string "auto" (returned as nullopt).
std::optional<double> number_or_auto(const Json& j, const std::string& parent, std::string_view name) {
  const Json& v = require(j, parent, name);
  if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
  return as_number(v, join(parent, name));
}

Report parse_report(const Json& v, const std::string& key) {
  if (v.is_number_integer()) {
    const auto b = v.get<std::int64_t>();
    if (b == 0) return Report::Zero;
    if (b == 1) return Report::One;
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "abstain") return Report::Abstain;
    if (s == "zero" || s == "0") return Report::Zero;
    if (s == "one" || s == "1") return Report::One;
  }
  throw ConfigError(key, "config: '" + key + "' must be 0, 1 or \"abstain\"");
}

// Wraps library precondition failures raised while building a fragment.
template <class F>
auto checked(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const PreconditionError& e) {
    throw ConfigError(key, std::string("config: invalid '") + key + "': " + e.what());
  }
}

}  // namespace

CostDistribution parse_cost(const Json& j, const std::string& key) {
  const std::string kind = text(j, key, "kind");
  CostDistribution out;
  if (kind == "uniform") {
    out = UniformCost{number_or(j, key, "lo", 0.0), number_or(j, key, "hi", 1.0)};
  } else if (kind == "point") {
    out = PointCost{number(j, key, "value")};
  } else if (kind == "exponential") {
    out = ExponentialCost{number(j, key, "rate")};
  } else if (kind == "lognormal") {
    out = LogNormalCost{number(j, key, "mu"), number(j, key, "sigma"), number(j, key, "cap")};
  } else {
    bad_value(join(key, "kind"), kind);
  }
  checked(key, [&] {
    validate_cost(out);
    return 0;
  });
  return out;
}

PriorSpec parse_prior(const Json& j, const std::string& key) {
  PriorSpec prior;
  const std::string family = has(j, "family") ? text(j, key, "family") : "conditional_iid";
  if (family == "conditional_iid") {
    prior.family = PriorFamily::ConditionalIID;
  } else if (family == "independent_bits") {
    prior.family = PriorFamily::IndependentBits;
  } else {
    bad_value(join(key, "family"), family);
  }

  const std::string mkey = join(key, "mixing");
  const Json& m = require(j, key, "mixing");
  const std::string kind = text(m, mkey, "kind");
  if (kind == "beta") {
    prior.mixing = BetaMixing{number(m, mkey, "a"), number(m, mkey, "b")};
  } else if (kind == "point") {
    prior.mixing = PointMixture{{MixtureAtom{1.0, number(m, mkey, "theta")}}};
  } else if (kind == "mixture") {
    const Json& atoms = require(m, mkey, "atoms");
    const std::string akey = join(mkey, "atoms");
    if (!atoms.is_array()) throw ConfigError(akey, "config: '" + akey + "' must be an array");
    PointMixture mix;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const std::string ek = akey + "[" + std::to_string(k) + "]";
      mix.atoms.push_back(MixtureAtom{number(atoms[k], ek, "weight"), number(atoms[k], ek, "theta")});
    }
    prior.mixing = std::move(mix);
  } else {
    bad_value(join(mkey, "kind"), kind);
  }

  prior.cost0 = parse_cost(require(j, key, "cost0"), join(key, "cost0"));
  prior.cost1 = parse_cost(require(j, key, "cost1"), join(key, "cost1"));
  checked(key, [&] {
    prior.validate();
    return 0;
  });
  return prior;
}

CostModel parse_cost_model(const Json& j, const std::string& key) {
  CostModel model;
  const std::string kind = text(j, key, "kind");
  if (kind == "linear") {
    model.kind = CostModelKind::Linear;
  } else if (kind == "chen") {
    model.kind = CostModelKind::Chen;
  } else {
    bad_value(join(key, "kind"), kind);
  }
  model.eta = number_or(j, key, "eta", 1.0);
  checked(key, [&] {
    model.validate();
    return 0;
  });
  return model;
}

Strategy StrategySpec::resolve(double tau) const {
  if (!auto_tau) return strategy;
  Threshold t = std::get<Threshold>(strategy);
  t.tau = tau;
  return t;
}

StrategySpec parse_strategy(const Json& j, const std::string& key) {
  StrategySpec spec;
  spec.auto_tau = false;
  const std::string kind = text(j, key, "kind");
  if (kind == "threshold") {
    Threshold t;
    const auto tau = number_or_auto(j, key, "tau");
    spec.auto_tau = !tau.has_value();
    t.tau = tau.value_or(0.0);
    const std::string off = has(j, "off") ? text(j, key, "off") : "abstain";
    if (off == "abstain") {
      t.off = OffThreshold::Abstain;
    } else if (off == "lie") {
      t.off = OffThreshold::Lie;
    } else if (off == "truth") {
      t.off = OffThreshold::Truth;
    } else {
      bad_value(join(key, "off"), off);
    }
    spec.strategy = t;
  } else if (kind == "truth") {
    spec.strategy = AlwaysTruth{};
  } else if (kind == "lie") {
    spec.strategy = AlwaysLie{};
  } else if (kind == "abstain") {
    spec.strategy = AlwaysAbstain{};
  } else if (kind == "constant") {
    spec.strategy = ConstantBit{static_cast<int>(count(j, key, "value"))};
  } else {
    bad_value(join(key, "kind"), kind);
  }
  checked(key, [&] {
    validate_strategy(spec.strategy);
    return 0;
  });
  return spec;
}

Json to_json(const CostDistribution& cost) {
  struct Visitor {
    Json operator()(const UniformCost& c) const { return {{"kind", "uniform"}, {"lo", c.lo}, {"hi", c.hi}}; }
    Json operator()(const PointCost& c) const { return {{"kind", "point"}, {"value", c.value}}; }
    Json operator()(const ExponentialCost& c) const { return {{"kind", "exponential"}, {"rate", c.rate}}; }
    Json operator()(const LogNormalCost& c) const {
      return {{"kind", "lognormal"}, {"mu", c.mu}, {"sigma", c.sigma}, {"cap", c.cap}};
    }
  };
  return std::visit(Visitor{}, cost);
}

Json to_json(const PriorSpec& prior) {
  Json j;
  j["family"] = prior.family == PriorFamily::ConditionalIID ? "conditional_iid" : "independent_bits";
  if (const auto* b = std::get_if<BetaMixing>(&prior.mixing)) {
    j["mixing"] = {{"kind", "beta"}, {"a", b->a}, {"b", b->b}};
  } else {
    Json atoms = Json::array();
    for (const auto& a : std::get<PointMixture>(prior.mixing).atoms) {
      atoms.push_back({{"weight", a.weight}, {"theta", a.theta}});
    }
    j["mixing"] = {{"kind", "mixture"}, {"atoms", atoms}};
  }
  j["cost0"] = to_json(prior.cost0);
  j["cost1"] = to_json(prior.cost1);
  return j;
}

Json to_json(const Strategy& strategy) {
  struct Visitor {
    Json operator()(const Threshold& t) const {
      const char* off = t.off == OffThreshold::Abstain ? "abstain" : t.off == OffThreshold::Lie ? "lie" : "truth";
      return {{"kind", "threshold"}, {"tau", t.tau}, {"off", off}};
    }
    Json operator()(const AlwaysTruth&) const { return {{"kind", "truth"}}; }
    Json operator()(const AlwaysLie&) const { return {{"kind", "lie"}}; }
    Json operator()(const AlwaysAbstain&) const { return {{"kind", "abstain"}}; }
    Json operator()(const ConstantBit& c) const { return {{"kind", "constant"}, {"value", c.value}}; }
  };
  return std::visit(Visitor{}, strategy);
}

ExperimentConfig parse_experiment(const Json& j, const std::string& command) {
  if (!j.is_object()) throw ConfigError("", "config: top level must be a JSON object");
  ExperimentConfig cfg;
  SurveySetup& s = cfg.setup;
  const std::string root;

  const bool is_audit_dp = command == "audit-dp";
  const bool is_scaling = command == "cost-scaling";

  if (has(j, "seed")) s.seed = count(j, root, "seed");
  if (has(j, "output")) cfg.output = text(j, root, "output");
  if (has(j, "trials")) cfg.trials = count(j, root, "trials");

  // audit-dp with the survey mechanism needs the full setup; the no-noise
  // variant still resolves posteriors, so the prior is always required.
  s.prior = parse_prior(require(j, root, "prior"));

  if (command == "posterior") {
    // Without n only the exact posteriors are reported.
    s.n = has(j, "n") ? count(j, root, "n") : 0;
    if (has(j, "epsilon")) s.epsilon = number_or_auto(j, root, "epsilon");
    if (has(j, "alpha")) s.alpha = number(j, root, "alpha");
    if (has(j, "delta")) s.delta = number(j, root, "delta");
    if (has(j, "posterior_samples")) s.posterior_samples = count(j, root, "posterior_samples");
    return cfg;
  }

  if (is_scaling) {
    const Json& ns = require(j, root, "ns");
    if (!ns.is_array()) throw ConfigError("ns", "config: 'ns' must be an array");
    for (std::size_t k = 0; k < ns.size(); ++k) cfg.ns.push_back(as_count(ns[k], "ns[" + std::to_string(k) + "]"));
  } else {
    s.n = count(j, root, "n");
  }
  s.alpha = number(j, root, "alpha");
  s.delta = number(j, root, "delta");
  if (command == "threshold") {
    if (has(j, "threshold_trials")) s.threshold_trials = count(j, root, "threshold_trials");
    return cfg;
  }

  s.epsilon = has(j, "epsilon") ? number_or_auto(j, root, "epsilon") : std::nullopt;
  s.beta = has(j, "beta") ? number_or_auto(j, root, "beta") : std::nullopt;
  if (has(j, "beta_rule")) {
    const std::string rule = text(j, root, "beta_rule");
    if (rule == "linear") {
      s.beta_rule = CostModelKind::Linear;
    } else if (rule == "chen") {
      s.beta_rule = CostModelKind::Chen;
    } else {
      bad_value("beta_rule", rule);
    }
  }
  if (has(j, "posteriors")) {
    const std::string src = text(j, root, "posteriors");
    if (src == "exact") {
      s.posteriors = PosteriorSource::Exact;
    } else if (src == "clamped") {
      s.posteriors = PosteriorSource::Clamped;
    } else {
      bad_value("posteriors", src);
    }
  }
  if (has(j, "threshold_trials")) s.threshold_trials = count(j, root, "threshold_trials");
  if (has(j, "posterior_samples")) s.posterior_samples = count(j, root, "posterior_samples");
  if (has(j, "clamp_payments")) {
    const Json& v = require(j, root, "clamp_payments");
    if (!v.is_boolean()) throw ConfigError("clamp_payments", "config: 'clamp_payments' must be a boolean");
    s.clamp_payments = v.get<bool>();
  }
  if (has(j, "noise")) {
    const std::string noise = text(j, root, "noise");
    if (noise == "laplace") {
      cfg.noise = NoiseMode::Sample;
    } else if (noise == "disabled") {
      cfg.noise = NoiseMode::Disabled;
    } else {
      bad_value("noise", noise);
    }
  }
  if (has(j, "cost_model")) cfg.cost_model = parse_cost_model(require(j, root, "cost_model"));
  cfg.strategy = has(j, "strategy") ? parse_strategy(require(j, root, "strategy")) : StrategySpec{};

  if (!is_audit_dp) {
    cfg.trials = count(j, root, "trials");
    return cfg;
  }

  const std::string akey = "audit";
  const Json& a = require(j, root, "audit");
  DpAuditSettings& d = cfg.audit;
  const Json& reports = require(a, akey, "reports");
  if (!reports.is_array()) throw ConfigError("audit.reports", "config: 'audit.reports' must be an array");
  for (std::size_t k = 0; k < reports.size(); ++k) {
    d.reports.push_back(parse_report(reports[k], "audit.reports[" + std::to_string(k) + "]"));
  }
  d.index = count(a, akey, "index");
  d.flipped = parse_report(require(a, akey, "flipped"), "audit.flipped");
  if (has(a, "bins")) d.bins = count(a, akey, "bins");
  if (has(a, "tolerance")) d.tolerance = number(a, akey, "tolerance");
  if (has(a, "mechanism")) {
    const std::string mech = text(a, akey, "mechanism");
    if (mech == "survey") {
      d.mechanism = AuditMechanism::Survey;
    } else if (mech == "no-noise") {
      d.mechanism = AuditMechanism::NoNoise;
    } else {
      bad_value("audit.mechanism", mech);
    }
  }
  if (has(a, "observable")) {
    const std::string obs = text(a, akey, "observable");
    if (obs == "estimate") {
      d.observable = AuditObservable::Estimate;
    } else if (obs == "estimate_and_payment") {
      d.observable = AuditObservable::EstimateAndPayment;
    } else {
      bad_value("audit.observable", obs);
    }
  }
  cfg.trials = has(j, "trials") ? count(j, root, "trials") : 100000;
  if (d.reports.size() != s.n) {
    throw ConfigError("audit.reports", "config: 'audit.reports' must hold n entries");
  }
  if (d.index >= s.n) throw ConfigError("audit.index", "config: 'audit.index' out of range");
  return cfg;
}

}  // namespace dpsurvey
