#ifndef CRD_MARKOV_ENGINE_HPP
#define CRD_MARKOV_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "crd/evo_dynamics.hpp"

// Birth-death Markov chain over the Z+1 cooperator-count states. The
// stationary distribution is computed two independent ways: the closed-form
// detailed-balance product (primary, exact, O(Z)) and damped power iteration
// on the transpose of the tridiagonal transition matrix (cross-check).

namespace crd {

struct TransitionMatrix {
  // Row k of the implied matrix: p_{k,k-1} = down[k], p_{k,k} = stay[k],
  // p_{k,k+1} = up[k]; down[0] = up[Z] = 0.
  std::vector<double> down;
  std::vector<double> stay;
  std::vector<double> up;

  int size() const { return static_cast<int>(stay.size()); }
};

inline TransitionMatrix build_transition_matrix(const PopulationModel& m) {
  m.validate();
  const int z = m.population_size;
  const FitnessTable f = build_fitness_table(m);
  TransitionMatrix s;
  s.down.resize(z + 1);
  s.stay.resize(z + 1);
  s.up.resize(z + 1);
  for (int k = 0; k <= z; ++k) {
    s.up[k] = transition_up(k, m, f);
    s.down[k] = transition_down(k, m, f);
    s.stay[k] = 1.0 - s.up[k] - s.down[k];
  }
  return s;
}

enum class StationaryMethod { product_form, eigen };

struct StationaryDistribution {
  std::vector<double> probabilities;  // P(k), k in [0, Z]
  StationaryMethod method = StationaryMethod::product_form;
  double normalization_residual = 0.0;
  double detailed_balance_residual = 0.0;
};

namespace detail {

inline void require_irreducible(const TransitionMatrix& s) {
  const int z = s.size() - 1;
  for (int k = 0; k < z; ++k)
    if (!(s.up[k] > 0.0))
      throw std::runtime_error("chain reducible; stationary distribution not unique");
  for (int k = 1; k <= z; ++k)
    if (!(s.down[k] > 0.0))
      throw std::runtime_error("chain reducible; stationary distribution not unique");
}

inline double detailed_balance_residual(const std::vector<double>& p,
                                        const TransitionMatrix& s) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k)
    worst = std::max(worst, std::abs(p[k] * s.up[k] - p[k + 1] * s.down[k + 1]));
  return worst;
}

inline void normalize(std::vector<double>& p, double& residual_out) {
  double sum = 0.0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
  double check = 0.0;
  for (double v : p) check += v;
  residual_out = std::abs(check - 1.0);
}

}  // namespace detail

// P(k) proportional to prod_{j=1..k} T+(j-1)/T-(j), accumulated in log space.
inline StationaryDistribution stationary_product_form(const PopulationModel& m) {
  const TransitionMatrix s = build_transition_matrix(m);
  detail::require_irreducible(s);
  const int z = s.size() - 1;
  std::vector<double> logw(z + 1, 0.0);
  for (int k = 1; k <= z; ++k)
    logw[k] = logw[k - 1] + std::log(s.up[k - 1]) - std::log(s.down[k]);
  const double peak = *std::max_element(logw.begin(), logw.end());
  StationaryDistribution d;
  d.method = StationaryMethod::product_form;
  d.probabilities.resize(z + 1);
  for (int k = 0; k <= z; ++k) d.probabilities[k] = std::exp(logw[k] - peak);
  detail::normalize(d.probabilities, d.normalization_residual);
  d.detailed_balance_residual = detail::detailed_balance_residual(d.probabilities, s);
  return d;
}

// Left eigenvector for eigenvalue 1 by power iteration on the transpose,
// mixed half-and-half with the identity so the iteration is aperiodic even
// when every stay probability vanishes (mu = 1). The stopping rule bounds the
// remaining geometric tail, not just the last increment, so the returned
// vector is within tol of the fixed point in L1.
inline StationaryDistribution stationary_eigen(const PopulationModel& m,
                                               double tol = 1e-13,
                                               long max_iterations = 20000000) {
  const TransitionMatrix s = build_transition_matrix(m);
  detail::require_irreducible(s);
  const int z = s.size() - 1;
  const std::size_t n = static_cast<std::size_t>(z) + 1;
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  std::vector<double> w(n);
  double ratio = 0.0;          // smoothed decay of successive increments
  double last_diff = -1.0;
  for (long it = 0; it < max_iterations; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = v[j] * s.stay[j];
      if (j > 0) acc += v[j - 1] * s.up[j - 1];
      if (j + 1 < n) acc += v[j + 1] * s.down[j + 1];
      w[j] = 0.5 * v[j] + 0.5 * acc;
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] /= sum;
      diff += std::abs(w[j] - v[j]);
    }
    v.swap(w);
    if (last_diff > 0.0 && diff > 0.0)
      ratio = std::max(ratio * 0.9, std::min(diff / last_diff, 0.9999999));
    last_diff = diff;
    const double tail =
        ratio < 1.0 ? diff * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
    if (diff < tol && (diff == 0.0 || tail < tol)) {
      StationaryDistribution d;
      d.method = StationaryMethod::eigen;
      for (double& x : v) x = std::max(x, 0.0);
      d.probabilities = std::move(v);
      detail::normalize(d.probabilities, d.normalization_residual);
      d.detailed_balance_residual =
          detail::detailed_balance_residual(d.probabilities, s);
      return d;
    }
  }
  throw std::runtime_error(
      "stationary_eigen: power iteration did not converge; last L1 increment " +
      std::to_string(last_diff));
}

// Mean cooperator fraction sum_k P(k) * k/Z.
inline double average_cooperation(const StationaryDistribution& d) {
  const int z = static_cast<int>(d.probabilities.size()) - 1;
  double total = 0.0;
  for (int k = 0; k <= z; ++k)
    total += d.probabilities[k] * static_cast<double>(k) / z;
  return total;
}

// Probability that a randomly sampled group meets the threshold at state k:
//   s_G(k) = C(Z,N-a)^-1 sum_h C(k,h) C(Z-k,N-a-h) [p*theta(h+a-M) + (1-p)*theta(h-M)]
// The hypergeometric weights are renormalized by their computed sum so they
// form an exact probability distribution; forced-success cases then come out
// 1 to machine precision rather than to log-gamma precision.
inline double group_success_at_state(int k, const PopulationModel& m) {
  detail::check_state(k, m, "group_success_at_state");
  const int z = m.population_size;
  const int seats = m.adaptive_group_size();
  const int a = m.hybrid.agent_count;
  const int thr = m.game.threshold;
  const double p = m.hybrid.coop_probability;
  const double log_denom = log_binomial(z, seats);
  double total = 0.0;
  double weight_sum = 0.0;
  for (int h = 0; h <= seats; ++h) {
    const double lw =
        log_binomial(k, h) + log_binomial(z - k, seats - h) - log_denom;
    if (std::isinf(lw)) continue;
    const double w = std::exp(lw);
    weight_sum += w;
    total += w * (p * heaviside(h + a - thr) + (1.0 - p) * heaviside(h - thr));
  }
  return total / weight_sum;
}

// sum_k P(k) * s_G(k).
inline double average_group_success(const StationaryDistribution& d,
                                    const PopulationModel& m) {
  if (static_cast<int>(d.probabilities.size()) != m.population_size + 1)
    throw std::domain_error(
        "average_group_success: distribution length does not match Z+1");
  double total = 0.0;
  for (int k = 0; k <= m.population_size; ++k)
    total += d.probabilities[k] * group_success_at_state(k, m);
  return total;
}

// ||P S - P||_1 for a row-stochastic tridiagonal S.
inline double stationarity_residual_l1(const StationaryDistribution& d,
                                       const TransitionMatrix& s) {
  const std::size_t n = d.probabilities.size();
  if (n != static_cast<std::size_t>(s.size()))
    throw std::domain_error("stationarity_residual_l1: dimension mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double acc = d.probabilities[j] * s.stay[j];
    if (j > 0) acc += d.probabilities[j - 1] * s.up[j - 1];
    if (j + 1 < n) acc += d.probabilities[j + 1] * s.down[j + 1];
    total += std::abs(acc - d.probabilities[j]);
  }
  return total;
}

// Total variation distance between two probability vectors of equal length.
inline double total_variation(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::domain_error("total_variation: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return 0.5 * total;
}

}  // namespace crd

#endif  // CRD_MARKOV_ENGINE_HPP
