#ifndef CRD_SIMULATORS_HPP
#define CRD_SIMULATORS_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "crd/markov_engine.hpp"

// Monte Carlo oracles for the analytic pipeline: a chain-level sampler that
// draws directly from T+/T-, and an agent-based simulator that enacts the
// sampling story behind the fitness equations (explicit group draws, one
// joint cooperation coin per group for the fixed members). Both are
// deterministic given the seed.

namespace crd {

inline constexpr std::string_view kGeneratorId = "mt19937_64";

struct SimulationConfig {
  PopulationModel model;
  std::uint64_t steps = 1000000;
  std::uint64_t burn_in = 10000;
  std::uint64_t seed = 1;
  int group_samples = 1;  // G, groups sampled per fitness estimate (agent mode)

  void validate() const {
    model.validate();
    if (steps == 0) throw std::invalid_argument("steps must be positive");
    if (burn_in >= steps) throw std::invalid_argument("burn_in must be < steps");
    if (group_samples < 1) throw std::invalid_argument("group_samples must be >= 1");
  }
};

struct EmpiricalDistribution {
  std::vector<double> occupancy;  // visit frequency per state, sums to 1
  std::uint64_t steps_counted = 0;
  std::uint64_t seed = 0;
};

namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0, 1), 53-bit resolution
  double u01() { return (engine_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(u01() * static_cast<double>(n));
  }

 private:
  std::mt19937_64 engine_;
};

// Number of cooperators among `draws` co-players pulled without replacement
// from a pool of `coops` cooperators and `total - coops` defectors.
inline int sample_hypergeometric(Rng& rng, int coops, int total, int draws) {
  int hits = 0;
  for (int d = 0; d < draws; ++d) {
    if (rng.u01() * (total - d) < static_cast<double>(coops - hits))
      ++hits;
  }
  return hits;
}

// One sampled group payoff for a focal player of the given strategy when the
// other Z-1 adaptive agents hold `coops_among_others` cooperators. The a
// fixed members cooperate jointly on a single coin with probability p.
inline double sampled_group_payoff(Rng& rng, Strategy s, int coops_among_others,
                                   const PopulationModel& m) {
  const int seats = m.adaptive_group_size();
  const int i = sample_hypergeometric(rng, coops_among_others,
                                      m.population_size - 1, seats - 1);
  const bool agents_cooperate = rng.u01() < m.hybrid.coop_probability;
  const int group_coops = i + (s == Strategy::C ? 1 : 0) +
                          (agents_cooperate ? m.hybrid.agent_count : 0);
  return payoff(s, group_coops, m.game);
}

}  // namespace detail

// Samples the exact T+/T- birth-death process: starting from k = floor(Z/2),
// each step draws one uniform and moves up, down, or stays. Occupancy is
// recorded for every step index >= burn_in.
inline EmpiricalDistribution simulate_chain(const SimulationConfig& cfg) {
  cfg.validate();
  if (!(cfg.model.mutation_rate > 0.0))
    throw std::invalid_argument("simulate_chain: mu must be > 0");
  const int z = cfg.model.population_size;
  const TransitionMatrix s = build_transition_matrix(cfg.model);

  detail::Rng rng(cfg.seed);
  std::vector<std::uint64_t> visits(z + 1, 0);
  int k = z / 2;
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const double u = rng.u01();
    if (u < s.up[k])
      ++k;
    else if (u < s.up[k] + s.down[k])
      --k;
    if (t >= cfg.burn_in) ++visits[k];
  }

  EmpiricalDistribution e;
  e.seed = cfg.seed;
  e.steps_counted = cfg.steps - cfg.burn_in;
  e.occupancy.resize(z + 1);
  for (int j = 0; j <= z; ++j)
    e.occupancy[j] = static_cast<double>(visits[j]) / e.steps_counted;
  return e;
}

// Monte Carlo estimate of the fitness of a focal player with the given
// strategy at population state k, averaging over `samples` freshly drawn
// groups. Returns the mean and its standard error.
struct FitnessEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline FitnessEstimate estimate_fitness_sampled(int k, Strategy s,
                                                const PopulationModel& m,
                                                std::uint64_t samples,
                                                std::uint64_t seed) {
  m.validate();
  if (samples == 0)
    throw std::invalid_argument("estimate_fitness_sampled: samples must be positive");
  if (k < 0 || k > m.population_size)
    throw std::domain_error("estimate_fitness_sampled: state outside [0,Z]");
  if (s == Strategy::C && k < 1)
    throw std::domain_error("estimate_fitness_sampled: no cooperator exists at k=0");
  if (s == Strategy::D && k > m.population_size - 1)
    throw std::domain_error("estimate_fitness_sampled: no defector exists at k=Z");

  detail::Rng rng(seed);
  const int coops_among_others = k - (s == Strategy::C ? 1 : 0);
  double mean = 0.0;
  double m2 = 0.0;  // Welford
  for (std::uint64_t n = 1; n <= samples; ++n) {
    const double x = detail::sampled_group_payoff(rng, s, coops_among_others, m);
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }
  FitnessEstimate out;
  out.mean = mean;
  if (samples > 1) {
    const double variance = m2 / (samples - 1);
    out.standard_error = std::sqrt(variance / samples);
  }
  return out;
}

// Full agent-based run: Z explicit strategy labels; each step picks a focal
// agent, mutates it with probability mu, otherwise lets it imitate a random
// distinct partner via the Fermi rule on fitness estimates averaged over
// group_samples freshly sampled groups per agent.
inline EmpiricalDistribution simulate_agents(const SimulationConfig& cfg) {
  cfg.validate();
  const PopulationModel& m = cfg.model;
  const int z = m.population_size;

  detail::Rng rng(cfg.seed);
  std::vector<char> is_coop(z, 0);
  int k = z / 2;
  for (int i = 0; i < k; ++i) is_coop[i] = 1;

  std::vector<std::uint64_t> visits(z + 1, 0);
  const auto estimate = [&](int self_index) {
    const Strategy s = is_coop[self_index] ? Strategy::C : Strategy::D;
    const int others = k - (is_coop[self_index] ? 1 : 0);
    double total = 0.0;
    for (int g = 0; g < cfg.group_samples; ++g)
      total += detail::sampled_group_payoff(rng, s, others, m);
    return total / cfg.group_samples;
  };

  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    const int focal = static_cast<int>(rng.below(z));
    if (rng.u01() < m.mutation_rate) {
      // mutate into the opposite strategy
      is_coop[focal] ^= 1;
      k += is_coop[focal] ? 1 : -1;
    } else {
      int partner = static_cast<int>(rng.below(z - 1));
      if (partner >= focal) ++partner;
      if (is_coop[partner] != is_coop[focal]) {
        const double f_focal = estimate(focal);
        const double f_partner = estimate(partner);
        const double prob =
            imitation_probability(f_partner - f_focal, m.selection_strength);
        if (rng.u01() < prob) {
          is_coop[focal] = is_coop[partner];
          k += is_coop[focal] ? 1 : -1;
        }
      }
    }
    if (t >= cfg.burn_in) ++visits[k];
  }

  EmpiricalDistribution e;
  e.seed = cfg.seed;
  e.steps_counted = cfg.steps - cfg.burn_in;
  e.occupancy.resize(z + 1);
  for (int j = 0; j <= z; ++j)
    e.occupancy[j] = static_cast<double>(visits[j]) / e.steps_counted;
  return e;
}

}  // namespace crd

#endif  // CRD_SIMULATORS_HPP
