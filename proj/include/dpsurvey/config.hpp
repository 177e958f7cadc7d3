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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dpsurvey/agents.hpp"
#include "dpsurvey/equilibrium.hpp"
#include "dpsurvey/priors.hpp"
#include "dpsurvey/report.hpp"

namespace dpsurvey {

using Json = nlohmann::json;

// Fragment parsers. Every failure throws ConfigError naming the dotted key.
PriorSpec parse_prior(const Json& j, const std::string& key = "prior");
CostDistribution parse_cost(const Json& j, const std::string& key);
CostModel parse_cost_model(const Json& j, const std::string& key = "cost_model");

// A strategy whose threshold may be "auto", i.e. the resolved tau.
struct StrategySpec {
  Strategy strategy = Threshold{};
  bool auto_tau = true;
  Strategy resolve(double tau) const;
};
StrategySpec parse_strategy(const Json& j, const std::string& key = "strategy");

Json to_json(const PriorSpec& prior);
Json to_json(const CostDistribution& cost);
Json to_json(const Strategy& strategy);

enum class AuditMechanism { Survey, NoNoise };
enum class AuditObservable { Estimate, EstimateAndPayment };

struct DpAuditSettings {
  std::vector<Report> reports;
  std::size_t index = 0;
  Report flipped = Report::One;
  std::size_t bins = 20;
  double tolerance = 0.05;
  AuditMechanism mechanism = AuditMechanism::Survey;
  AuditObservable observable = AuditObservable::Estimate;
};

// One experiment document. Which keys are required depends on the command;
// see parse_experiment.
struct ExperimentConfig {
  SurveySetup setup;
  std::vector<std::size_t> ns;
  std::size_t trials = 0;
  CostModel cost_model;
  StrategySpec strategy;
  NoiseMode noise = NoiseMode::Sample;
  std::optional<std::string> output;
  DpAuditSettings audit;
};

// Parses the document for `command`. Keys a command does not use are
// ignored; keys it needs must be present.
ExperimentConfig parse_experiment(const Json& j, const std::string& command);

}  // namespace dpsurvey
