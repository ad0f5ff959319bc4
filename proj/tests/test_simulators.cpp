#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "crd/simulators.hpp"
#include "support/oracles.hpp"

using namespace crd;
using Catch::Matchers::WithinAbs;

namespace {

PopulationModel defaults_model() {
  PopulationModel m;
  m.population_size = 100;
  m.mutation_rate = 0.01;
  m.selection_strength = 2.0;
  m.game = GameParams{6, 3, 0.5, 1.0, 0.1};
  m.hybrid = HybridPolicy{0, 0.0};
  return m;
}

double occupancy_sum(const EmpiricalDistribution& e) {
  double s = 0.0;
  for (double v : e.occupancy) s += v;
  return s;
}

std::vector<double> mirrored(const std::vector<double>& v) {
  return {v.rbegin(), v.rend()};
}

}  // namespace

TEST_CASE("chain simulator is deterministic and emits a distribution") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.steps = 50000;
  cfg.burn_in = 1000;
  cfg.seed = 99;
  const EmpiricalDistribution a = simulate_chain(cfg);
  const EmpiricalDistribution b = simulate_chain(cfg);
  CHECK(a.occupancy == b.occupancy);  // bit-identical
  CHECK(a.steps_counted == cfg.steps - cfg.burn_in);
  CHECK(a.seed == cfg.seed);
  CHECK_THAT(occupancy_sum(a), WithinAbs(1.0, 1e-12));
  for (double v : a.occupancy) CHECK(v >= 0.0);

  cfg.seed = 100;
  const EmpiricalDistribution c = simulate_chain(cfg);
  CHECK(a.occupancy != c.occupancy);
}

TEST_CASE("chain simulator recovers the binomial law at mu=1") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.model.mutation_rate = 1.0;
  cfg.steps = 1000000;
  cfg.burn_in = 10000;
  cfg.seed = 7;
  const EmpiricalDistribution e = simulate_chain(cfg);
  const int z = cfg.model.population_size;
  std::vector<double> binom(z + 1);
  for (int k = 0; k <= z; ++k)
    binom[k] = std::exp(log_binomial(z, k) - z * std::log(2.0));
  CHECK(total_variation(e.occupancy, binom) < 0.02);
}

TEST_CASE("chain simulator occupancy is symmetric under neutral drift") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.model.population_size = 40;
  cfg.model.selection_strength = 0.0;
  cfg.model.mutation_rate = 0.1;
  cfg.steps = 1000000;
  cfg.burn_in = 10000;
  cfg.seed = 11;
  const EmpiricalDistribution e = simulate_chain(cfg);
  CHECK(total_variation(e.occupancy, mirrored(e.occupancy)) < 0.02);
}

TEST_CASE("chain simulator approaches the analytic stationary distribution") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.model.game.risk = 0.9;
  cfg.model.hybrid = HybridPolicy{2, 0.5};
  cfg.steps = 1000000;
  cfg.burn_in = 10000;
  cfg.seed = 23;
  const EmpiricalDistribution e = simulate_chain(cfg);
  const StationaryDistribution d = stationary_product_form(cfg.model);
  CHECK(total_variation(e.occupancy, d.probabilities) < 0.02);

  // longer runs get closer (same model, fixed seeds)
  SimulationConfig short_cfg = cfg;
  short_cfg.steps = 100000;
  short_cfg.burn_in = 10000;
  const double tv_short =
      total_variation(simulate_chain(short_cfg).occupancy, d.probabilities);
  const double tv_long = total_variation(e.occupancy, d.probabilities);
  CHECK(tv_long < tv_short);
}

TEST_CASE("chain simulator preconditions") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.steps = 100;
  cfg.burn_in = 200;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.burn_in = 10;
  cfg.model.mutation_rate = 0.0;
  CHECK_THROWS_AS(simulate_chain(cfg), std::invalid_argument);
}

TEST_CASE("sampled fitness estimate matches the analytic fitness") {
  PopulationModel m;
  m.population_size = 12;
  m.mutation_rate = 0.01;
  m.selection_strength = 2.0;
  m.game = GameParams{5, 3, 0.9, 1.0, 0.1};
  m.hybrid = HybridPolicy{2, 0.5};  // N-a = 3
  m.validate();

  const double fc = fitness_cooperator(6, m);
  const double fd = fitness_defector(6, m);
  // frozen analytic values for this instance
  CHECK_THAT(fc, WithinAbs(0.5318181818181819, 1e-12));
  CHECK_THAT(fd, WithinAbs(0.4681818181818182, 1e-12));

  const FitnessEstimate est_c =
      estimate_fitness_sampled(6, Strategy::C, m, 100000, 17);
  const FitnessEstimate est_d =
      estimate_fitness_sampled(6, Strategy::D, m, 100000, 18);
  CHECK(est_c.standard_error > 0.0);
  CHECK(std::abs(est_c.mean - fc) < 3.0 * est_c.standard_error);
  CHECK(std::abs(est_d.mean - fd) < 3.0 * est_d.standard_error);
}

TEST_CASE("sampled fitness estimator is unbiased across seeds") {
  PopulationModel m;
  m.population_size = 20;
  m.game = GameParams{6, 3, 0.7, 1.0, 0.1};
  m.hybrid = HybridPolicy{1, 0.4};
  m.validate();
  const double truth = fitness_cooperator(9, m);

  double grand = 0.0, grand_sq = 0.0;
  const int reps = 300;
  const std::uint64_t samples = 400;
  for (int seed = 0; seed < reps; ++seed) {
    const double mean = estimate_fitness_sampled(9, Strategy::C, m, samples,
                                                 1000 + seed)
                            .mean;
    grand += mean;
    grand_sq += mean * mean;
  }
  grand /= reps;
  const double var_of_means = (grand_sq / reps - grand * grand) * reps / (reps - 1);
  const double se_grand = std::sqrt(var_of_means / reps);
  CHECK(std::abs(grand - truth) < 3.0 * se_grand);
}

TEST_CASE("degenerate one-seat groups take one of exactly two values") {
  PopulationModel m;
  m.population_size = 8;
  m.game = GameParams{3, 2, 0.6, 1.0, 0.1};
  m.hybrid = HybridPolicy{2, 0.5};  // N-a = 1, focal alone with the agents
  m.validate();
  const double with_agents = expected_payoff(Strategy::C, 1, HybridPolicy{2, 1.0}, m.game);
  const double without = expected_payoff(Strategy::C, 1, HybridPolicy{2, 0.0}, m.game);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FitnessEstimate est = estimate_fitness_sampled(4, Strategy::C, m, 1, seed);
    const bool hit = std::abs(est.mean - with_agents) < 1e-15 ||
                     std::abs(est.mean - without) < 1e-15;
    CHECK(hit);
    CHECK(est.standard_error == 0.0);
  }
}

TEST_CASE("single composition at k=Z has zero composition variance") {
  PopulationModel m;
  m.population_size = 10;
  m.game = GameParams{4, 2, 0.5, 1.0, 0.1};
  m.hybrid = HybridPolicy{1, 1.0};  // deterministic agents too
  m.validate();
  const FitnessEstimate est =
      estimate_fitness_sampled(10, Strategy::C, m, 5000, 23);
  CHECK_THAT(est.mean,
             WithinAbs(expected_payoff(Strategy::C, 3, m.hybrid, m.game), 1e-15));
  CHECK(est.standard_error == 0.0);
}

TEST_CASE("sampled fitness rejects impossible focal states") {
  PopulationModel m = defaults_model();
  CHECK_THROWS_AS(estimate_fitness_sampled(0, Strategy::C, m, 10, 1),
                  std::domain_error);
  CHECK_THROWS_AS(
      estimate_fitness_sampled(m.population_size, Strategy::D, m, 10, 1),
      std::domain_error);
}

TEST_CASE("agent simulator is deterministic and validates its config") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.model.population_size = 20;
  cfg.steps = 20000;
  cfg.burn_in = 1000;
  cfg.seed = 5;
  const EmpiricalDistribution a = simulate_agents(cfg);
  const EmpiricalDistribution b = simulate_agents(cfg);
  CHECK(a.occupancy == b.occupancy);
  CHECK_THAT(occupancy_sum(a), WithinAbs(1.0, 1e-12));

  cfg.model.population_size = 4;  // < N - a = 6
  CHECK_THROWS_AS(simulate_agents(cfg), std::invalid_argument);
}

TEST_CASE("flat payoffs reduce the agent dynamics to neutral drift") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.model.population_size = 30;
  cfg.model.game.risk = 0.0;
  cfg.model.game.cost_fraction = 0.0;
  cfg.model.mutation_rate = 0.1;
  cfg.steps = 1000000;
  cfg.burn_in = 10000;
  cfg.seed = 30;
  const EmpiricalDistribution e = simulate_agents(cfg);
  CHECK(total_variation(e.occupancy, mirrored(e.occupancy)) < 0.03);
}

TEST_CASE("agent simulator with p=0 matches the smaller no-agent game") {
  SimulationConfig with_agents;
  with_agents.model.population_size = 30;
  with_agents.model.mutation_rate = 0.05;
  with_agents.model.selection_strength = 2.0;
  with_agents.model.game = GameParams{5, 2, 0.7, 1.0, 0.1};
  with_agents.model.hybrid = HybridPolicy{2, 0.0};
  with_agents.steps = 1000000;
  with_agents.burn_in = 10000;
  with_agents.seed = 41;

  SimulationConfig no_agents = with_agents;
  no_agents.model.game.group_size = 3;
  no_agents.model.hybrid = HybridPolicy{0, 0.0};
  no_agents.seed = 42;

  const EmpiricalDistribution ea = simulate_agents(with_agents);
  const EmpiricalDistribution eb = simulate_agents(no_agents);
  CHECK(total_variation(ea.occupancy, eb.occupancy) < 0.03);
}

TEST_CASE("agent fitness sampling concentrates on the analytic value as G grows") {
  SimulationConfig cfg;
  cfg.model = defaults_model();
  cfg.model.population_size = 20;
  cfg.model.mutation_rate = 0.05;
  cfg.steps = 200000;
  cfg.burn_in = 5000;
  cfg.seed = 13;
  cfg.group_samples = 8;
  const EmpiricalDistribution e = simulate_agents(cfg);
  const StationaryDistribution d = stationary_product_form(cfg.model);
  // with averaged estimates the occupancy tracks the analytic chain closely
  CHECK(total_variation(e.occupancy, d.probabilities) < 0.1);
}
