#ifndef CRD_VALIDATION_HPP
#define CRD_VALIDATION_HPP

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "crd/markov_engine.hpp"
#include "crd/sweep.hpp"

// Built-in property suite behind the `validate` subcommand. Each check is a
// structural fact of the dynamics (game-transformation equivalences, detailed
// balance, solver agreement, forced success). Running it with the literal
// uncorrected transition rates demonstrates why the additive mutation term is
// required: the boundary states absorb and several checks fail.

namespace crd {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;  // measured value compared against the threshold
  double threshold = 0.0;
  std::string detail;
};

namespace detail {

// Deterministic sample of valid models spanning the parameter domains.
inline std::vector<PopulationModel> validation_sample(std::size_t count,
                                                      std::uint64_t seed,
                                                      bool literal) {
  std::mt19937_64 rng(seed);
  const auto u01 = [&] { return (rng() >> 11) * 0x1.0p-53; };
  std::vector<PopulationModel> models;
  while (models.size() < count) {
    PopulationModel m;
    m.game.group_size = 2 + static_cast<int>(u01() * 7);       // 2..8
    m.game.threshold = 1 + static_cast<int>(u01() * m.game.group_size);
    m.hybrid.agent_count = static_cast<int>(u01() * m.game.group_size);  // 0..N-1
    m.hybrid.coop_probability = u01();
    m.game.risk = u01();
    m.game.cost_fraction = u01();
    m.game.endowment = 0.5 + 1.5 * u01();
    m.population_size = 5 + static_cast<int>(u01() * 76);      // 5..80
    m.mutation_rate = std::pow(10.0, -1.7 + 1.4 * u01());      // ~0.02..0.5
    m.selection_strength = 3.0 * u01();
    m.literal_transitions = literal;
    try {
      m.validate();
    } catch (const std::exception&) {
      continue;
    }
    models.push_back(m);
  }
  return models;
}

template <typename Body>
ValidationCheck run_check(std::string name, double threshold, Body body) {
  ValidationCheck check;
  check.name = std::move(name);
  check.threshold = threshold;
  try {
    body(check);
  } catch (const std::exception& e) {
    check.passed = false;
    check.detail = e.what();
  }
  return check;
}

}  // namespace detail

// Runs every check and reports pass/fail with the measured residual. All
// checks pass on the corrected dynamics; with literal_transitions the
// reducibility of the chain surfaces as failures.
inline std::vector<ValidationCheck> run_validation_suite(
    bool literal_transitions = false) {
  std::vector<ValidationCheck> checks;
  const auto stationary = [&](PopulationModel m) {
    m.literal_transitions = literal_transitions;
    return stationary_product_form(m);
  };
  const PopulationModel canon = canonical_model();

  checks.push_back(detail::run_check(
      "fig5A_equivalence_p0", 1e-10, [&](ValidationCheck& c) {
        PopulationModel base = canon;
        base.game.threshold = 2;
        base.hybrid.coop_probability = 0.0;
        PopulationModel ref = base;
        ref.game.group_size = 5;
        ref.hybrid.agent_count = 0;
        const auto d_ref = stationary(ref);
        double worst = 0.0;
        for (const auto& [n, a] : {std::pair{6, 1}, std::pair{7, 2}}) {
          PopulationModel hybrid = base;
          hybrid.game.group_size = n;
          hybrid.hybrid.agent_count = a;
          const auto d = stationary(hybrid);
          for (std::size_t k = 0; k < d.probabilities.size(); ++k)
            worst = std::max(worst, std::abs(d.probabilities[k] -
                                             d_ref.probabilities[k]));
        }
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "fig5B_equivalence_p1", 1e-10, [&](ValidationCheck& c) {
        PopulationModel hybrid = canon;
        hybrid.game.group_size = 6;
        hybrid.game.threshold = 4;
        hybrid.hybrid = HybridPolicy{2, 1.0};
        PopulationModel ref = canon;
        ref.game.group_size = 4;
        ref.game.threshold = 2;
        const auto da = stationary(hybrid);
        const auto db = stationary(ref);
        double worst = 0.0;
        for (std::size_t k = 0; k < da.probabilities.size(); ++k)
          worst = std::max(worst,
                           std::abs(da.probabilities[k] - db.probabilities[k]));
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "fig5C_equal_effort_distinct", 0.01, [&](ValidationCheck& c) {
        std::vector<std::vector<double>> dists;
        for (const auto& [a, p] : {std::pair{1, 1.0}, std::pair{2, 0.5},
                                   std::pair{4, 0.25}}) {
          PopulationModel m = canon;
          m.hybrid = HybridPolicy{a, p};
          dists.push_back(stationary(m).probabilities);
        }
        double min_tv = 1.0;
        for (std::size_t i = 0; i < dists.size(); ++i)
          for (std::size_t j = i + 1; j < dists.size(); ++j)
            min_tv = std::min(min_tv, total_variation(dists[i], dists[j]));
        c.residual = min_tv;
        c.passed = min_tv > c.threshold;
      }));

  const auto sample = detail::validation_sample(25, 42, literal_transitions);

  checks.push_back(detail::run_check(
      "detailed_balance", 1e-12, [&](ValidationCheck& c) {
        double worst = 0.0;
        for (const auto& m : sample)
          worst = std::max(worst,
                           stationary_product_form(m).detailed_balance_residual);
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "method_agreement", 1e-10, [&](ValidationCheck& c) {
        double worst = 0.0;
        for (const auto& m : sample) {
          const auto pf = stationary_product_form(m);
          const auto ev = stationary_eigen(m);
          for (std::size_t k = 0; k < pf.probabilities.size(); ++k)
            worst = std::max(worst, std::abs(pf.probabilities[k] -
                                             ev.probabilities[k]));
        }
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "stationarity_residual", 1e-10, [&](ValidationCheck& c) {
        double worst = 0.0;
        for (const auto& m : sample) {
          const auto s = build_transition_matrix(m);
          worst = std::max(worst, stationarity_residual_l1(
                                      stationary_product_form(m), s));
          worst = std::max(worst,
                           stationarity_residual_l1(stationary_eigen(m), s));
        }
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "forced_success_a_eq_M_p1", 1e-14, [&](ValidationCheck& c) {
        double worst = 0.0;
        for (double r : {0.0, 0.3, 0.9, 1.0}) {
          PopulationModel m = canon;
          m.game.risk = r;
          m.hybrid = HybridPolicy{m.game.threshold, 1.0};
          const auto d = stationary(m);
          worst = std::max(worst, std::abs(average_group_success(d, m) - 1.0));
        }
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "full_support", 0.0, [&](ValidationCheck& c) {
        double min_p = 1.0;
        for (const auto& m : sample)
          for (double v : stationary_product_form(m).probabilities)
            min_p = std::min(min_p, v);
        c.residual = min_p;
        c.passed = min_p > c.threshold;
      }));

  checks.push_back(detail::run_check(
      "pure_mutation_binomial", 1e-10, [&](ValidationCheck& c) {
        PopulationModel m = canon;
        m.mutation_rate = 1.0;
        const auto d = stationary(m);
        const int z = m.population_size;
        double worst = 0.0;
        for (int k = 0; k <= z; ++k) {
          const double expected =
              std::exp(log_binomial(z, k) - z * std::log(2.0));
          worst = std::max(worst, std::abs(d.probabilities[k] - expected));
        }
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "neutral_drift_symmetry", 1e-12, [&](ValidationCheck& c) {
        PopulationModel m = canon;
        m.selection_strength = 0.0;
        const auto d = stationary(m);
        const int z = m.population_size;
        double worst = 0.0;
        for (int k = 0; k <= z; ++k)
          worst = std::max(worst, std::abs(d.probabilities[k] -
                                           d.probabilities[z - k]));
        c.residual = worst;
        c.passed = worst < c.threshold;
      }));

  checks.push_back(detail::run_check(
      "risk_monotonicity_a0", 0.0, [&](ValidationCheck& c) {
        PopulationModel low = canon;
        low.game.risk = 0.2;
        PopulationModel high = canon;
        high.game.risk = 0.9;
        const double gap = average_cooperation(stationary(high)) -
                           average_cooperation(stationary(low));
        c.residual = gap;
        c.passed = gap > c.threshold;
      }));

  return checks;
}

}  // namespace crd

#endif  // CRD_VALIDATION_HPP
