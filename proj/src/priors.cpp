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

#include "dpsurvey/priors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "dpsurvey/errors.hpp"

namespace dpsurvey {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const boost::math::normal kStandardNormal{};

double lognormal_untruncated_cdf(const LogNormalCost& d, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::cdf(kStandardNormal, (std::log(x) - d.mu) / d.sigma);
}

double mixture_total_weight(const PointMixture& m) {
  double total = 0.0;
  for (const auto& atom : m.atoms) total += atom.weight;
  return total;
}

// Low-order moments of the (normalised) mixing law.
struct MixingMoments {
  double e_theta = 0.0;
  double e_one_minus = 0.0;
  double e_theta_sq = 0.0;
  double e_theta_one_minus = 0.0;
};

MixingMoments mixing_moments(const Mixing& mixing) {
  return std::visit(
      Overloaded{
          [](const BetaMixing& m) {
            const double s = m.a + m.b;
            MixingMoments mm;
            mm.e_theta = m.a / s;
            mm.e_one_minus = m.b / s;
            mm.e_theta_sq = m.a * (m.a + 1) / (s * (s + 1));
            mm.e_theta_one_minus = m.a * m.b / (s * (s + 1));
            return mm;
          },
          [](const PointMixture& m) {
            const double total = mixture_total_weight(m);
            MixingMoments mm;
            for (const auto& atom : m.atoms) {
              const double w = atom.weight / total;
              mm.e_theta += w * atom.theta;
              mm.e_one_minus += w * (1 - atom.theta);
              mm.e_theta_sq += w * atom.theta * atom.theta;
              mm.e_theta_one_minus += w * atom.theta * (1 - atom.theta);
            }
            return mm;
          },
      },
      mixing);
}

double gamma_draw(double shape, Rng& rng) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  return gamma(rng);
}

double beta_draw(double a, double b, Rng& rng) {
  const double x = gamma_draw(a, rng);
  const double y = gamma_draw(b, rng);
  return x / (x + y);
}

double draw_atom(const std::vector<MixtureAtom>& atoms, const std::vector<double>& weights,
                 Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    acc += weights[k];
    if (u < acc) return atoms[k].theta;
  }
  // Rounding can leave u == total; fall back to the last atom with mass.
  for (std::size_t k = atoms.size(); k-- > 0;) {
    if (weights[k] > 0.0) return atoms[k].theta;
  }
  return atoms.back().theta;
}

}  // namespace

void validate_cost(const CostDistribution& dist) {
  std::visit(Overloaded{
                 [](const UniformCost& d) {
                   if (!(d.lo >= 0.0 && d.hi > d.lo && std::isfinite(d.hi))) {
                     throw PreconditionError("uniform cost needs 0 <= lo < hi < inf");
                   }
                 },
                 [](const PointCost& d) {
                   if (!(d.value >= 0.0 && std::isfinite(d.value))) {
                     throw PreconditionError("point cost must be finite and nonnegative");
                   }
                 },
                 [](const ExponentialCost& d) {
                   if (!(d.rate > 0.0 && std::isfinite(d.rate))) {
                     throw PreconditionError("exponential cost rate must be positive");
                   }
                 },
                 [](const LogNormalCost& d) {
                   if (!(d.sigma > 0.0 && std::isfinite(d.mu) && d.cap > 0.0 &&
                         std::isfinite(d.cap))) {
                     throw PreconditionError("lognormal cost needs sigma > 0 and finite cap > 0");
                   }
                   if (!(lognormal_untruncated_cdf(d, d.cap) > 0.0)) {
                     throw PreconditionError("lognormal cost cap leaves no probability mass");
                   }
                 },
             },
             dist);
}

double cost_cdf(const CostDistribution& dist, double x) {
  return std::visit(
      Overloaded{
          [x](const UniformCost& d) {
            if (x < d.lo) return 0.0;
            if (x >= d.hi) return 1.0;
            return (x - d.lo) / (d.hi - d.lo);
          },
          [x](const PointCost& d) { return x >= d.value ? 1.0 : 0.0; },
          [x](const ExponentialCost& d) { return x <= 0.0 ? 0.0 : -std::expm1(-d.rate * x); },
          [x](const LogNormalCost& d) {
            if (x >= d.cap) return 1.0;
            return lognormal_untruncated_cdf(d, x) / lognormal_untruncated_cdf(d, d.cap);
          },
      },
      dist);
}

double cost_quantile(const CostDistribution& dist, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw PreconditionError("cost_quantile: q must lie in [0, 1]");
  return std::visit(
      Overloaded{
          [q](const UniformCost& d) { return d.lo + q * (d.hi - d.lo); },
          [](const PointCost& d) { return d.value; },
          [q](const ExponentialCost& d) {
            if (q >= 1.0) return std::numeric_limits<double>::infinity();
            return -std::log1p(-q) / d.rate;
          },
          [q](const LogNormalCost& d) {
            if (q <= 0.0) return 0.0;
            if (q >= 1.0) return d.cap;
            const double level = q * lognormal_untruncated_cdf(d, d.cap);
            return std::min(d.cap,
                            std::exp(d.mu + d.sigma * boost::math::quantile(kStandardNormal, level)));
          },
      },
      dist);
}

double sample_cost(const CostDistribution& dist, Rng& rng) {
  if (const auto* point = std::get_if<PointCost>(&dist)) return point->value;
  return cost_quantile(dist, uniform_open01(rng));
}

double cost_search_cap(const CostDistribution& dist) {
  return std::visit(Overloaded{
                        [](const UniformCost& d) { return d.hi; },
                        [](const PointCost& d) { return d.value; },
                        [&dist](const ExponentialCost&) { return cost_quantile(dist, 1.0 - 1e-6); },
                        [](const LogNormalCost& d) { return d.cap; },
                    },
                    dist);
}

void PriorSpec::validate() const {
  std::visit(Overloaded{
                 [](const BetaMixing& m) {
                   if (!(m.a > 0.0 && m.b > 0.0 && std::isfinite(m.a) && std::isfinite(m.b))) {
                     throw PreconditionError("beta mixing needs a > 0 and b > 0");
                   }
                 },
                 [](const PointMixture& m) {
                   if (m.atoms.empty()) throw PreconditionError("point mixture has no atoms");
                   for (const auto& atom : m.atoms) {
                     if (!(atom.weight >= 0.0 && std::isfinite(atom.weight))) {
                       throw PreconditionError("mixture weights must be finite and nonnegative");
                     }
                     if (!(atom.theta >= 0.0 && atom.theta <= 1.0)) {
                       throw PreconditionError("mixture atoms must lie in [0, 1]");
                     }
                   }
                   if (!(mixture_total_weight(m) > 0.0)) {
                     throw PreconditionError("mixture weights sum to zero");
                   }
                 },
             },
             mixing);
  if (family == PriorFamily::IndependentBits) {
    const auto* m = std::get_if<PointMixture>(&mixing);
    if (m == nullptr || m->atoms.size() != 1) {
      throw PreconditionError("independent_bits prior needs a single fixed theta");
    }
  }
  validate_cost(cost0);
  validate_cost(cost1);
}

double bit_marginal(const PriorSpec& prior) { return mixing_moments(prior.mixing).e_theta; }

double posterior_bit_prob(const PriorSpec& prior, int bit) {
  if (bit != 0 && bit != 1) throw PreconditionError("posterior_bit_prob: bit must be 0 or 1");
  if (const auto* beta = std::get_if<BetaMixing>(&prior.mixing)) {
    // Conjugacy: theta | b_i ~ Beta(a + b_i, b + 1 - b_i).
    const double s = beta->a + beta->b + 1;
    return bit ? (beta->a + 1) / s : beta->a / s;
  }
  const auto mm = mixing_moments(prior.mixing);
  const double evidence = bit ? mm.e_theta : mm.e_one_minus;
  if (!(evidence > 0.0)) {
    throw DegeneratePriorError("posterior_bit_prob: conditioning bit has zero probability");
  }
  return (bit ? mm.e_theta_sq : mm.e_theta_one_minus) / evidence;
}

Posteriors informative_posteriors(const PriorSpec& prior) {
  Posteriors p{posterior_bit_prob(prior, 0), posterior_bit_prob(prior, 1)};
  if (p.p0 == p.p1) {
    throw DegeneratePriorError("prior has p0 == p1; a single point-mass mixing law is uninformative");
  }
  return p;
}

double sample_theta(const PriorSpec& prior, Rng& rng) {
  return std::visit(Overloaded{
                        [&rng](const BetaMixing& m) { return beta_draw(m.a, m.b, rng); },
                        [&rng](const PointMixture& m) {
                          std::vector<double> w;
                          w.reserve(m.atoms.size());
                          for (const auto& atom : m.atoms) w.push_back(atom.weight);
                          return draw_atom(m.atoms, w, rng);
                        },
                    },
                    prior.mixing);
}

double sample_posterior_theta(const PriorSpec& prior, int bit, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const BetaMixing& m) {
                          return beta_draw(m.a + bit, m.b + 1 - bit, rng);
                        },
                        [&](const PointMixture& m) {
                          std::vector<double> w;
                          w.reserve(m.atoms.size());
                          for (const auto& atom : m.atoms) {
                            w.push_back(atom.weight * (bit ? atom.theta : 1 - atom.theta));
                          }
                          if (!(std::accumulate(w.begin(), w.end(), 0.0) > 0.0)) {
                            throw DegeneratePriorError(
                                "sample_posterior_theta: conditioning bit has zero probability");
                          }
                          return draw_atom(m.atoms, w, rng);
                        },
                    },
                    prior.mixing);
}

AgentType sample_agent(const PriorSpec& prior, double theta, Rng& rng) {
  AgentType agent;
  agent.bit = uniform01(rng) < theta ? 1 : 0;
  agent.cost = sample_cost(prior.cost(agent.bit), rng);
  return agent;
}

Population sample_population(const PriorSpec& prior, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw PreconditionError("sample_population: n must be at least 1");
  prior.validate();
  Rng rng = make_rng(seed, 0);
  const double theta = sample_theta(prior, rng);
  Population pop;
  pop.agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pop.agents.push_back(sample_agent(prior, theta, rng));
  return pop;
}

double posterior_clamped_mean(const PriorSpec& prior, int bit, std::size_t n,
                              const NoiseSpec& noise, std::size_t samples, std::uint64_t seed,
                              Execution exec) {
  if (n < 2) throw PreconditionError("posterior_clamped_mean: n must be at least 2");
  if (samples < 1) throw PreconditionError("posterior_clamped_mean: samples must be positive");
  if (bit != 0 && bit != 1) throw PreconditionError("posterior_clamped_mean: bit must be 0 or 1");
  prior.validate();
  noise.validate();
  const auto others = static_cast<std::int64_t>(n - 1);
  const auto values = map_trials<double>(samples, exec, [&](std::size_t s) {
    Rng rng = make_rng(seed, s);
    const double theta = sample_posterior_theta(prior, bit, rng);
    std::binomial_distribution<std::int64_t> peers(others, theta);
    const std::int64_t sum = peers(rng) + bit;
    return perturb_and_clamp(sum, bit, n, noise, rng).p_tilde_minus_i;
  });
  // Fixed left-to-right order keeps the reduction scheduling independent.
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(samples);
}

double binomial_upper_tail(std::size_t n, double q, std::size_t k) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  // P[X >= k] = I_q(k, n - k + 1).
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), q);
}

namespace {

// Smallest tau with min over conditioning bits of P[c_j <= tau | b_i] >= level.
double peer_threshold(const PriorSpec& prior, double level) {
  if (prior.cost0 == prior.cost1) return cost_quantile(prior.cost0, level);

  std::vector<double> p_one;  // P[b_j = 1 | b_i = b] for every possible b
  const double marginal = bit_marginal(prior);
  if (marginal < 1.0) p_one.push_back(posterior_bit_prob(prior, 0));
  if (marginal > 0.0) p_one.push_back(posterior_bit_prob(prior, 1));

  auto coverage = [&](double tau) {
    double worst = 1.0;
    for (double p : p_one) {
      worst = std::min(worst, (1 - p) * cost_cdf(prior.cost0, tau) + p * cost_cdf(prior.cost1, tau));
    }
    return worst;
  };

  const double cap = std::max(cost_search_cap(prior.cost0), cost_search_cap(prior.cost1));
  if (coverage(cap) < level) {
    throw InsufficientDataError("cost_threshold: peer cost quantile exceeds the search cap");
  }
  if (coverage(0.0) >= level) return 0.0;
  double lo = 0.0;
  double hi = cap;
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    (coverage(mid) >= level ? hi : lo) = mid;
  }
  // Snap onto an atom when the bisection converged to one.
  for (const auto* dist : {&prior.cost0, &prior.cost1}) {
    if (const auto* point = std::get_if<PointCost>(dist)) {
      if (std::fabs(point->value - hi) <= 1e-9 * std::max(1.0, hi) &&
          coverage(point->value) >= level) {
        hi = point->value;
      }
    }
  }
  return hi;
}

}  // namespace

CostThreshold cost_threshold(const PriorSpec& prior, double alpha, double delta, std::size_t n,
                             std::size_t trials, std::uint64_t seed) {
  if (n < 2) throw PreconditionError("cost_threshold: n must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("cost_threshold: alpha in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("cost_threshold: delta in (0, 1)");
  prior.validate();

  // Required count of agents at or below tau; the epsilon guards against
  // (1 - alpha) n landing a hair above an integer.
  const auto required =
      static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9));

  // Tail probability as a function of tau, averaged over the theta law.
  std::function<double(double)> tail;
  if (prior.cost0 == prior.cost1) {
    tail = [&](double tau) { return binomial_upper_tail(n, cost_cdf(prior.cost0, tau), required); };
  } else if (const auto* mixture = std::get_if<PointMixture>(&prior.mixing)) {
    const double total = mixture_total_weight(*mixture);
    tail = [&, mixture, total](double tau) {
      const double f0 = cost_cdf(prior.cost0, tau);
      const double f1 = cost_cdf(prior.cost1, tau);
      double acc = 0.0;
      for (const auto& atom : mixture->atoms) {
        acc += atom.weight / total *
               binomial_upper_tail(n, atom.theta * f1 + (1 - atom.theta) * f0, required);
      }
      return acc;
    };
  } else {
    if (trials < 1) throw PreconditionError("cost_threshold: trials must be positive");
    auto thetas = std::make_shared<std::vector<double>>(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng = make_rng(seed, t);
      (*thetas)[t] = sample_theta(prior, rng);
    }
    tail = [&, thetas](double tau) {
      const double f0 = cost_cdf(prior.cost0, tau);
      const double f1 = cost_cdf(prior.cost1, tau);
      double acc = 0.0;
      for (double theta : *thetas) {
        acc += binomial_upper_tail(n, theta * f1 + (1 - theta) * f0, required);
      }
      return acc / static_cast<double>(thetas->size());
    };
  }

  const double cap = std::max(cost_search_cap(prior.cost0), cost_search_cap(prior.cost1));
  auto grid_hi = static_cast<std::int64_t>(std::ceil(cap / kThresholdGridStep - 1e-9));
  auto grid_point = [](std::int64_t k) { return static_cast<double>(k) / 1e4; };
  if (tail(grid_point(grid_hi)) < 1.0 - delta) {
    throw InsufficientDataError(
        "cost_threshold: participation quantile is unbounded within the search cap");
  }
  std::int64_t lo = -1;  // invariant: grid_hi satisfies, lo does not (or is -1)
  while (grid_hi - lo > 1) {
    const std::int64_t mid = lo + (grid_hi - lo) / 2;
    (tail(grid_point(mid)) >= 1.0 - delta ? grid_hi : lo) = mid;
  }

  CostThreshold result;
  result.tau_population = grid_point(grid_hi);
  result.tau_peer = peer_threshold(prior, 1.0 - alpha);
  result.tau = std::max(result.tau_population, result.tau_peer);
  return result;
}

}  // namespace dpsurvey
