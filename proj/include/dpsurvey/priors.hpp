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
#include <variant>
#include <vector>

#include "dpsurvey/parallel.hpp"
#include "dpsurvey/privacy.hpp"
#include "dpsurvey/rng.hpp"

namespace dpsurvey {

// ---------------------------------------------------------------------------
// Generative prior over exchangeable (bit, cost) populations.
//
// ConditionalIID: draw theta from the mixing law, then every agent's bit is
// Bernoulli(theta) and its cost is drawn from cost0 or cost1 according to
// that bit. The law is permutation invariant and a cost carries no information
// about other agents beyond the agent's bit.
//
// IndependentBits: theta is a fixed constant (mixing is a single atom), so
// bits are independent and the posteriors p0 and p1 coincide.
// ---------------------------------------------------------------------------

enum class PriorFamily { ConditionalIID, IndependentBits };

struct BetaMixing {
  double a = 1.0;
  double b = 1.0;
  bool operator==(const BetaMixing&) const = default;
};

struct MixtureAtom {
  double weight = 1.0;
  double theta = 0.5;
  bool operator==(const MixtureAtom&) const = default;
};

// Finite point-mass mixture over theta. Weights need not be normalised.
struct PointMixture {
  std::vector<MixtureAtom> atoms;
  bool operator==(const PointMixture&) const = default;
};

using Mixing = std::variant<BetaMixing, PointMixture>;

struct UniformCost {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const UniformCost&) const = default;
};

struct PointCost {
  double value = 0.0;
  bool operator==(const PointCost&) const = default;
};

struct ExponentialCost {
  double rate = 1.0;
  bool operator==(const ExponentialCost&) const = default;
};

// LogNormal(mu, sigma) conditioned on cost <= cap.
struct LogNormalCost {
  double mu = 0.0;
  double sigma = 1.0;
  double cap = 10.0;
  bool operator==(const LogNormalCost&) const = default;
};

using CostDistribution = std::variant<UniformCost, PointCost, ExponentialCost, LogNormalCost>;

void validate_cost(const CostDistribution& dist);
double cost_cdf(const CostDistribution& dist, double x);
// Smallest x with cdf(x) >= q, for q in [0, 1].
double cost_quantile(const CostDistribution& dist, double q);
double sample_cost(const CostDistribution& dist, Rng& rng);
// Upper end of the threshold search: the support maximum for bounded laws,
// the 1 - 1e-6 quantile otherwise.
double cost_search_cap(const CostDistribution& dist);

struct PriorSpec {
  PriorFamily family = PriorFamily::ConditionalIID;
  Mixing mixing = BetaMixing{};
  CostDistribution cost0 = PointCost{};
  CostDistribution cost1 = PointCost{};

  const CostDistribution& cost(int bit) const { return bit ? cost1 : cost0; }
  void validate() const;
  bool operator==(const PriorSpec&) const = default;
};

struct AgentType {
  int bit = 0;
  double cost = 0.0;
  bool operator==(const AgentType&) const = default;
};

struct Population {
  std::vector<AgentType> agents;
  std::size_t size() const { return agents.size(); }
};

// P[b_i = 1].
double bit_marginal(const PriorSpec& prior);

// Exact P[b_j = 1 | b_i = bit], j != i. Throws DegeneratePriorError when
// b_i = bit has probability zero.
double posterior_bit_prob(const PriorSpec& prior, int bit);

struct Posteriors {
  double p0 = 0.0;
  double p1 = 0.0;
  double prediction(int bit) const { return bit ? p1 : p0; }
};

// Both posteriors; throws DegeneratePriorError when p0 == p1 since the
// mechanism then has no informative gap to reward.
Posteriors informative_posteriors(const PriorSpec& prior);

double sample_theta(const PriorSpec& prior, Rng& rng);
// Draws theta from its posterior given that one agent holds `bit`.
double sample_posterior_theta(const PriorSpec& prior, int bit, Rng& rng);
AgentType sample_agent(const PriorSpec& prior, double theta, Rng& rng);

// Bit-identical for identical (prior, n, seed).
Population sample_population(const PriorSpec& prior, std::size_t n, std::uint64_t seed);

// Monte Carlo estimate of E[p~_{-i} | b_i = bit] when every other agent reports
// truthfully: the clamped, noisy leave-one-out average over the other n - 1
// bits. Sample s uses stream (seed, s).
double posterior_clamped_mean(const PriorSpec& prior, int bit, std::size_t n,
                              const NoiseSpec& noise, std::size_t samples, std::uint64_t seed,
                              Execution exec = Execution::Parallel);

inline constexpr double kThresholdGridStep = 1e-4;

struct CostThreshold {
  double tau = 0.0;           // max of the two below
  double tau_population = 0.0;  // >= (1 - alpha) n agents below tau w.p. >= 1 - delta
  double tau_peer = 0.0;        // another agent is below tau w.p. >= 1 - alpha, given either bit
};

// Threshold used by the equilibrium strategies. The population threshold is
// searched on a 1e-4 grid; its tail probability is an exact binomial tail
// whenever the per-agent probability of cost <= tau does not depend on theta
// (identical cost laws, or a finite mixture summed atom by atom) and a
// common-random-numbers Monte Carlo average of exact conditional tails over
// `trials` theta draws otherwise. Throws InsufficientDataError when the
// condition still fails at the search cap.
CostThreshold cost_threshold(const PriorSpec& prior, double alpha, double delta, std::size_t n,
                             std::size_t trials, std::uint64_t seed);

// P[Binomial(n, q) >= k].
double binomial_upper_tail(std::size_t n, double q, std::size_t k);

}  // namespace dpsurvey
