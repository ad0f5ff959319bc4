#ifndef CRD_TESTS_ORACLES_HPP
#define CRD_TESTS_ORACLES_HPP

// Test-only oracles, each computing a quantity the library also computes but
// by a deliberately different route:
//  - enumerated_fitness: exhaustive walk over every labeled co-player subset
//    and both agent-coin outcomes, no binomial coefficients at all;
//  - dense_stationary: Gaussian elimination on the full (Z+1)^2 system
//    pi * S = pi, no detailed-balance product, no power iteration;
//  - direct_transition_up/down: the fitness/Fermi/transition chain written
//    out with multiplicative integer binomials instead of log-gamma.

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "crd/markov_engine.hpp"

namespace crd::oracle {

// Average payoff of a focal player over all C(Z-1, N-a-1) co-player subsets,
// with the two all-or-none agent outcomes weighted p and 1-p.
inline double enumerated_fitness(Strategy s, int k, const PopulationModel& m) {
  const int z = m.population_size;
  const int draws = m.adaptive_group_size() - 1;
  const int self_coop = s == Strategy::C ? 1 : 0;
  // labeled pool of the Z-1 others: first `coops` entries cooperate
  const int coops = k - self_coop;
  const int pool = z - 1;

  std::vector<int> idx(draws);
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  long count = 0;
  const double p = m.hybrid.coop_probability;
  const int a = m.hybrid.agent_count;
  for (;;) {
    int group_coops = self_coop;
    for (int j : idx)
      if (j < coops) ++group_coops;
    total += p * payoff(s, group_coops + a, m.game) +
             (1.0 - p) * payoff(s, group_coops, m.game);
    ++count;
    // next combination of size `draws` from `pool`
    int pos = draws - 1;
    while (pos >= 0 && idx[pos] == pool - draws + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int q = pos + 1; q < draws; ++q) idx[q] = idx[q - 1] + 1;
  }
  return total / count;
}

// Stationary distribution from the full dense linear system.
inline std::vector<double> dense_stationary(const PopulationModel& m) {
  const TransitionMatrix s = build_transition_matrix(m);
  const int n = s.size();
  // A = S^T - I, with the last row replaced by the normalization constraint
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (int k = 0; k < n; ++k) {
    A[k][k] = s.stay[k] - 1.0;
    if (k > 0) A[k][k - 1] = s.up[k - 1];
    if (k + 1 < n) A[k][k + 1] = s.down[k + 1];
  }
  std::vector<double> rhs(n, 0.0);
  for (int j = 0; j < n; ++j) A[n - 1][j] = 1.0;
  rhs[n - 1] = 1.0;

  // Gaussian elimination with partial pivoting
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row)
      if (std::abs(A[row][col]) > std::abs(A[pivot][col])) pivot = row;
    std::swap(A[col], A[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    if (A[col][col] == 0.0) throw std::runtime_error("dense solve: singular");
    for (int row = col + 1; row < n; ++row) {
      const double f = A[row][col] / A[col][col];
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) A[row][j] -= f * A[col][j];
      rhs[row] -= f * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int row = n - 1; row >= 0; --row) {
    double acc = rhs[row];
    for (int j = row + 1; j < n; ++j) acc -= A[row][j] * x[j];
    x[row] = acc / A[row][row];
  }
  return x;
}

// C(n, r) by the multiplicative rule; exact in double up to ~C(100,5).
inline double binomial_direct(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  double v = 1.0;
  for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return v;
}

inline double direct_expected_payoff(Strategy s, int i, const PopulationModel& m) {
  const double p = m.hybrid.coop_probability;
  const int a = m.hybrid.agent_count;
  return p * payoff(s, i + a, m.game) + (1.0 - p) * payoff(s, i, m.game);
}

inline double direct_fitness(Strategy s, int k, const PopulationModel& m) {
  const int z = m.population_size;
  const int seats = m.adaptive_group_size();
  const double denom = binomial_direct(z - 1, seats - 1);
  double total = 0.0;
  for (int i = 0; i <= seats - 1; ++i) {
    const double w =
        s == Strategy::C
            ? binomial_direct(k - 1, i) * binomial_direct(z - k, seats - 1 - i)
            : binomial_direct(k, i) * binomial_direct(z - k - 1, seats - 1 - i);
    if (w == 0.0) continue;
    total += w * direct_expected_payoff(s, s == Strategy::C ? i + 1 : i, m);
  }
  return total / denom;
}

inline double direct_transition_up(int k, const PopulationModel& m) {
  const double z = m.population_size;
  const double fc = k >= 1 ? direct_fitness(Strategy::C, k, m) : 0.0;
  const double fd = k <= z - 1 ? direct_fitness(Strategy::D, k, m) : 0.0;
  const double fermi = 1.0 / (1.0 + std::exp(-m.selection_strength * (fc - fd)));
  return (z - k) / z *
         ((1.0 - m.mutation_rate) * k / (z - 1.0) * fermi + m.mutation_rate);
}

inline double direct_transition_down(int k, const PopulationModel& m) {
  const double z = m.population_size;
  const double fc = k >= 1 ? direct_fitness(Strategy::C, k, m) : 0.0;
  const double fd = k <= z - 1 ? direct_fitness(Strategy::D, k, m) : 0.0;
  const double fermi = 1.0 / (1.0 + std::exp(-m.selection_strength * (fd - fc)));
  return k / z *
         ((1.0 - m.mutation_rate) * (z - k) / (z - 1.0) * fermi + m.mutation_rate);
}

}  // namespace crd::oracle

#endif  // CRD_TESTS_ORACLES_HPP
