#ifndef CRD_EVO_DYNAMICS_HPP
#define CRD_EVO_DYNAMICS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crd/crd_game.hpp"

// Strategy-level dynamics of the adaptive population: hypergeometric group
// sampling gives strategy fitness, pairwise Fermi comparison gives imitation,
// and together with mutation they yield the birth-death transition rates
// T+(k), T-(k) over the cooperator count k in [0, Z].

namespace crd {

struct PopulationModel {
  int population_size = 100;       // Z
  double mutation_rate = 0.01;     // mu
  double selection_strength = 2.0; // beta
  GameParams game;
  HybridPolicy hybrid;
  // Reproduces the uncorrected transition rates that lack the additive
  // mutation term. The boundary states become absorbing; inspection only.
  bool literal_transitions = false;

  int adaptive_group_size() const { return game.group_size - hybrid.agent_count; }

  void validate() const {
    game.validate();
    hybrid.validate(game);
    if (population_size < 2)
      throw std::invalid_argument("population_size must be >= 2 (imitation needs a partner)");
    if (population_size < adaptive_group_size())
      throw std::invalid_argument("population_size must be >= N-a (group must be sampleable)");
    if (mutation_rate < 0.0 || mutation_rate > 1.0)
      throw std::invalid_argument("mutation_rate must be in [0,1]");
    if (selection_strength < 0.0)
      throw std::invalid_argument("selection_strength must be >= 0");
  }
};

// ln C(n, r); -inf when r is outside [0, n] (the C(n,r) = 0 convention).
inline double log_binomial(int n, int r) {
  if (n < 0) throw std::domain_error("log_binomial: n must be >= 0");
  if (r < 0 || r > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

// Fermi rule 1/(1 + exp(-beta*delta_f)), stable for large |beta*delta_f|.
inline double imitation_probability(double delta_f, double beta) {
  if (beta < 0.0) throw std::domain_error("imitation_probability: beta must be >= 0");
  const double x = beta * delta_f;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace detail {

// Common shape of the two fitness sums: hypergeometric weights over the i
// cooperators among the N-a-1 sampled co-players, combined in log space and
// exponentiated per term.
template <typename PayoffAt>
double fitness_sum(int own_coops, int other_defectors, int group_seats,
                   PayoffAt payoff_at) {
  const int draws = group_seats - 1;
  const double log_denom = log_binomial(own_coops + other_defectors, draws);
  double total = 0.0;
  for (int i = 0; i <= draws; ++i) {
    const double lw = log_binomial(own_coops, i) +
                      log_binomial(other_defectors, draws - i) - log_denom;
    if (std::isinf(lw)) continue;
    total += std::exp(lw) * payoff_at(i);
  }
  return total;
}

}  // namespace detail

// f_C(k): expected payoff of a cooperator at population state k, averaged over
// all hypergeometric draws of its N-a-1 co-players. k = 0 returns 0 by
// convention; the value is multiplied by a vanishing weight in T+-.
inline double fitness_cooperator(int k, const PopulationModel& m) {
  const int z = m.population_size;
  if (k < 0 || k > z) throw std::domain_error("fitness_cooperator: state outside [0,Z]");
  if (k == 0) return 0.0;
  return detail::fitness_sum(k - 1, z - k, m.adaptive_group_size(), [&](int i) {
    return expected_payoff(Strategy::C, i + 1, m.hybrid, m.game);
  });
}

// f_D(k): defector counterpart. k = Z returns 0 by convention.
inline double fitness_defector(int k, const PopulationModel& m) {
  const int z = m.population_size;
  if (k < 0 || k > z) throw std::domain_error("fitness_defector: state outside [0,Z]");
  if (k == z) return 0.0;
  return detail::fitness_sum(k, z - k - 1, m.adaptive_group_size(), [&](int i) {
    return expected_payoff(Strategy::D, i, m.hybrid, m.game);
  });
}

// Per-state fitness, built once per model; T+ and T- at state k consume both.
struct FitnessTable {
  std::vector<double> coop;    // f_C(k)
  std::vector<double> defect;  // f_D(k)
};

inline FitnessTable build_fitness_table(const PopulationModel& m) {
  const int z = m.population_size;
  FitnessTable t;
  t.coop.resize(z + 1);
  t.defect.resize(z + 1);
  for (int k = 0; k <= z; ++k) {
    t.coop[k] = fitness_cooperator(k, m);
    t.defect[k] = fitness_defector(k, m);
  }
  return t;
}

namespace detail {

inline double transition_up_from(int k, const PopulationModel& m, double f_c,
                                 double f_d) {
  const double z = m.population_size;
  const double p_dc = imitation_probability(f_c - f_d, m.selection_strength);
  const double imitation = (1.0 - m.mutation_rate) * (k / (z - 1.0)) * p_dc;
  const double inner =
      m.literal_transitions ? imitation : imitation + m.mutation_rate;
  return (z - k) / z * inner;
}

inline double transition_down_from(int k, const PopulationModel& m, double f_c,
                                   double f_d) {
  const double z = m.population_size;
  const double p_cd = imitation_probability(f_d - f_c, m.selection_strength);
  const double imitation = (1.0 - m.mutation_rate) * ((z - k) / (z - 1.0)) * p_cd;
  const double inner =
      m.literal_transitions ? imitation : imitation + m.mutation_rate;
  return k / z * inner;
}

inline void check_state(int k, const PopulationModel& m, const char* who) {
  if (k < 0 || k > m.population_size)
    throw std::domain_error(std::string(who) + ": state outside [0,Z]");
}

}  // namespace detail

// T+(k) = ((Z-k)/Z) * [ (1-mu) * (k/(Z-1)) * P(D->C) + mu ]
// The additive mu inside the bracket keeps the chain irreducible; the literal
// flag drops it, which makes k = 0 and k = Z absorbing.
inline double transition_up(int k, const PopulationModel& m, const FitnessTable& f) {
  detail::check_state(k, m, "transition_up");
  return detail::transition_up_from(k, m, f.coop[k], f.defect[k]);
}

// T-(k) = (k/Z) * [ (1-mu) * ((Z-k)/(Z-1)) * P(C->D) + mu ]
inline double transition_down(int k, const PopulationModel& m, const FitnessTable& f) {
  detail::check_state(k, m, "transition_down");
  return detail::transition_down_from(k, m, f.coop[k], f.defect[k]);
}

inline double transition_up(int k, const PopulationModel& m) {
  detail::check_state(k, m, "transition_up");
  return detail::transition_up_from(k, m, fitness_cooperator(k, m),
                                    fitness_defector(k, m));
}

inline double transition_down(int k, const PopulationModel& m) {
  detail::check_state(k, m, "transition_down");
  return detail::transition_down_from(k, m, fitness_cooperator(k, m),
                                      fitness_defector(k, m));
}

}  // namespace crd

#endif  // CRD_EVO_DYNAMICS_HPP
