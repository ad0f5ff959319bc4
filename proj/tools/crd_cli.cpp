// Command-line frontend: stationary analysis of a single parameter point,
// parameter sweeps (presets or explicit axes), Monte Carlo simulation, and
// the built-in validation suite. Configuration comes from flags or a JSON
// config file with the same field names; flags take precedence.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crd/crd.hpp"

namespace {

struct RunConfig {
  crd::PopulationModel model;  // Z, mu, beta, b, c, N, M, a, p, r
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 1;
  std::uint64_t steps = 1000000;
  std::uint64_t burn_in = 10000;
  int group_samples = 1;
  int workers = 0;  // 0 = machine parallelism
};

crd::PopulationModel default_model() { return crd::canonical_model(); }

std::string describe(const crd::PopulationModel& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "Z=%d mu=%g beta=%g b=%g c=%g N=%d M=%d a=%d p=%g r=%g%s",
                m.population_size, m.mutation_rate, m.selection_strength,
                m.game.endowment, m.game.cost_fraction, m.game.group_size,
                m.game.threshold, m.hybrid.agent_count,
                m.hybrid.coop_probability, m.game.risk,
                m.literal_transitions ? " literal_transitions" : "");
  return buf;
}

// Flag values win over config-file values, which win over defaults. CLI11
// binds flags directly into `cfg`, so config values are applied only for
// fields whose flags were not given on the command line.
void apply_config_file(const std::string& path, RunConfig& cfg, CLI::App& app) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j;
  in >> j;
  const auto flag_given = [&](const std::string& name) {
    const CLI::Option* opt = app.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  const auto load = [&](const char* key, const std::string& flag, auto& field) {
    if (j.contains(key) && !flag_given(flag))
      field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  load("Z", "--Z", cfg.model.population_size);
  load("mu", "--mu", cfg.model.mutation_rate);
  load("beta", "--beta", cfg.model.selection_strength);
  load("b", "--b", cfg.model.game.endowment);
  load("c", "--c", cfg.model.game.cost_fraction);
  load("N", "--N", cfg.model.game.group_size);
  load("M", "--M", cfg.model.game.threshold);
  load("a", "--a", cfg.model.hybrid.agent_count);
  load("p", "--p", cfg.model.hybrid.coop_probability);
  load("r", "--r", cfg.model.game.risk);
  load("out", "--out", cfg.out);
  load("format", "--format", cfg.format);
  load("seed", "--seed", cfg.seed);
  load("steps", "--steps", cfg.steps);
  load("burn_in", "--burn-in", cfg.burn_in);
  load("group_samples", "--group-samples", cfg.group_samples);
  load("workers", "--workers", cfg.workers);
  if (j.contains("literal_transitions") && !flag_given("--literal-transitions"))
    cfg.model.literal_transitions = j.at("literal_transitions").get<bool>();
}

void add_model_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--Z", cfg.model.population_size, "adaptive population size");
  cmd->add_option("--mu", cfg.model.mutation_rate, "mutation rate");
  cmd->add_option("--beta", cfg.model.selection_strength, "selection strength");
  cmd->add_option("--b", cfg.model.game.endowment, "endowment");
  cmd->add_option("--c", cfg.model.game.cost_fraction, "cost fraction");
  cmd->add_option("--N", cfg.model.game.group_size, "group size");
  cmd->add_option("--M", cfg.model.game.threshold, "cooperator threshold");
  cmd->add_option("--a", cfg.model.hybrid.agent_count, "fixed agents per group");
  cmd->add_option("--p", cfg.model.hybrid.coop_probability,
                  "fixed-agent cooperation probability");
  cmd->add_option("--r", cfg.model.game.risk, "risk of collective loss");
  cmd->add_flag("--literal-transitions", cfg.model.literal_transitions,
                "use the uncorrected transition rates without the additive "
                "mutation term (inspection only)");
}

nlohmann::ordered_json result_header(const crd::PopulationModel& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = crd::kSchemaVersion;
  j["engine_version"] = std::string(crd::kEngineVersion);
  j["params"] = crd::detail::params_to_json(m);
  return j;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << body;
  if (!os) throw std::runtime_error("write failed for " + path);
}

std::string g12(double v) { return crd::detail::format_g12(v); }

int cmd_stationary(const RunConfig& cfg) {
  cfg.model.validate();
  std::cout << "config: " << describe(cfg.model) << "\n";
  const auto d = crd::stationary_product_form(cfg.model);
  const double coop = crd::average_cooperation(d);
  const double success = crd::average_group_success(d, cfg.model);

  if (!cfg.out.empty()) {
    if (cfg.format == "json") {
      auto j = result_header(cfg.model);
      j["method"] = "product_form";
      j["avg_cooperation"] = coop;
      j["avg_success"] = success;
      j["normalization_residual"] = d.normalization_residual;
      j["detailed_balance_residual"] = d.detailed_balance_residual;
      j["stationary_distribution"] = d.probabilities;
      write_text_file(cfg.out, j.dump(2) + "\n");
    } else if (cfg.format == "csv") {
      std::string body =
          "Z,mu,beta,b,c,N,M,a,p,r,avg_cooperation,avg_success,k,probability\n";
      const auto& m = cfg.model;
      for (std::size_t k = 0; k < d.probabilities.size(); ++k) {
        body += std::to_string(m.population_size) + ',' + g12(m.mutation_rate) +
                ',' + g12(m.selection_strength) + ',' + g12(m.game.endowment) +
                ',' + g12(m.game.cost_fraction) + ',' +
                std::to_string(m.game.group_size) + ',' +
                std::to_string(m.game.threshold) + ',' +
                std::to_string(m.hybrid.agent_count) + ',' +
                g12(m.hybrid.coop_probability) + ',' + g12(m.game.risk) + ',' +
                g12(coop) + ',' + g12(success) + ',' + std::to_string(k) + ',' +
                g12(d.probabilities[k]) + '\n';
      }
      write_text_file(cfg.out, body);
    } else {
      throw std::runtime_error("unknown format '" + cfg.format + "' (csv|json)");
    }
    std::cout << "wrote " << cfg.out << "\n";
  }
  std::printf("avg_cooperation = %.6f\n", coop);
  std::printf("avg_success = %.6f\n", success);
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& preset,
              const std::string& axis1_arg, const std::string& axis2_arg) {
  if (!preset.empty() && (!axis1_arg.empty() || !axis2_arg.empty()))
    throw std::runtime_error("--preset conflicts with explicit --axis1/--axis2");
  if (preset.empty() && axis1_arg.empty())
    throw std::runtime_error("sweep needs --preset or --axis1");

  const auto parse_axis = [](const std::string& arg) {
    // name=start:stop:count
    const auto eq = arg.find('=');
    const auto c1 = arg.find(':');
    const auto c2 = arg.find(':', c1 + 1);
    if (eq == std::string::npos || c1 == std::string::npos ||
        c2 == std::string::npos || !(eq < c1 && c1 < c2))
      throw std::runtime_error("axis must have the form name=start:stop:count");
    crd::SweepAxis ax;
    ax.param = crd::sweep_parameter_from_string(arg.substr(0, eq));
    const double start = std::stod(arg.substr(eq + 1, c1 - eq - 1));
    const double stop = std::stod(arg.substr(c1 + 1, c2 - c1 - 1));
    const int count = std::stoi(arg.substr(c2 + 1));
    ax.values = crd::linspace(start, stop, count);
    return ax;
  };

  crd::SweepSpec spec;
  if (!preset.empty()) {
    spec = crd::figure_preset(preset);
    spec.base.literal_transitions = cfg.model.literal_transitions;
  } else {
    spec.base = cfg.model;
    spec.metrics = {crd::Metric::avg_cooperation, crd::Metric::avg_success};
    spec.axis1 = parse_axis(axis1_arg);
    if (!axis2_arg.empty()) spec.axis2 = parse_axis(axis2_arg);
  }

  std::cout << "config: " << describe(spec.base) << "\n";
  const std::string out = cfg.out.empty() ? ("sweep." + cfg.format) : cfg.out;
  const auto panels = crd::expand_panels(spec);
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t cells = 0, skipped = 0;
  for (const auto& [label, panel_spec] : panels) {
    const crd::SweepResult result = crd::run_sweep(panel_spec, cfg.workers);
    cells += result.records.size() + result.skipped.size();
    skipped += result.skipped.size();
    std::filesystem::path path(out);
    if (!label.empty()) {
      std::filesystem::path base = path;
      const std::string ext = base.extension().string();
      base.replace_extension();
      path = base.string() + "_" + label + ext;
    }
    if (cfg.format == "json")
      crd::write_json(result, path);
    else if (cfg.format == "csv")
      crd::write_csv(result, path);
    else
      throw std::runtime_error("unknown format '" + cfg.format + "' (csv|json)");
    std::cout << "wrote " << path.string() << "\n";
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("cells = %zu, skipped = %zu, wall = %.3f s\n", cells, skipped,
              seconds);
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::string& mode) {
  crd::SimulationConfig sim;
  sim.model = cfg.model;
  sim.steps = cfg.steps;
  sim.burn_in = cfg.burn_in;
  sim.seed = cfg.seed;
  sim.group_samples = cfg.group_samples;
  sim.validate();
  std::cout << "config: " << describe(cfg.model) << " seed=" << cfg.seed
            << " steps=" << cfg.steps << " burn_in=" << cfg.burn_in << "\n";

  crd::EmpiricalDistribution emp;
  if (mode == "chain")
    emp = crd::simulate_chain(sim);
  else if (mode == "agents")
    emp = crd::simulate_agents(sim);
  else
    throw std::runtime_error("unknown mode '" + mode + "' (chain|agents)");

  // the literal-transition chain is reducible, so the analytic comparison
  // may be unavailable
  std::optional<double> tv;
  try {
    const auto analytic = crd::stationary_product_form(cfg.model);
    tv = crd::total_variation(emp.occupancy, analytic.probabilities);
  } catch (const std::exception& e) {
    std::cout << "analytic comparison unavailable: " << e.what() << "\n";
  }

  const std::string out = cfg.out.empty() ? ("simulate." + cfg.format) : cfg.out;
  if (cfg.format == "json") {
    auto j = result_header(cfg.model);
    j["mode"] = mode;
    j["generator"] = std::string(crd::kGeneratorId);
    j["seed"] = emp.seed;
    j["steps"] = sim.steps;
    j["burn_in"] = sim.burn_in;
    j["group_samples"] = sim.group_samples;
    j["steps_counted"] = emp.steps_counted;
    j["occupancy"] = emp.occupancy;
    j["tv_to_analytic"] = tv ? nlohmann::ordered_json(*tv)
                             : nlohmann::ordered_json(nullptr);
    write_text_file(out, j.dump(2) + "\n");
  } else if (cfg.format == "csv") {
    std::string body =
        "Z,mu,beta,b,c,N,M,a,p,r,mode,generator,seed,steps,burn_in,k,frequency\n";
    const auto& m = cfg.model;
    for (std::size_t k = 0; k < emp.occupancy.size(); ++k) {
      body += std::to_string(m.population_size) + ',' + g12(m.mutation_rate) +
              ',' + g12(m.selection_strength) + ',' + g12(m.game.endowment) +
              ',' + g12(m.game.cost_fraction) + ',' +
              std::to_string(m.game.group_size) + ',' +
              std::to_string(m.game.threshold) + ',' +
              std::to_string(m.hybrid.agent_count) + ',' +
              g12(m.hybrid.coop_probability) + ',' + g12(m.game.risk) + ',' +
              mode + ',' + std::string(crd::kGeneratorId) + ',' +
              std::to_string(emp.seed) + ',' + std::to_string(sim.steps) + ',' +
              std::to_string(sim.burn_in) + ',' + std::to_string(k) + ',' +
              g12(emp.occupancy[k]) + '\n';
    }
    write_text_file(out, body);
  } else {
    throw std::runtime_error("unknown format '" + cfg.format + "' (csv|json)");
  }
  std::cout << "wrote " << out << "\n";
  if (tv) std::printf("tv_to_analytic = %.6f\n", *tv);
  return 0;
}

int cmd_validate(bool literal) {
  const auto checks = crd::run_validation_suite(literal);
  bool all_pass = true;
  for (const auto& c : checks) {
    all_pass = all_pass && c.passed;
    std::printf("[%s] %-28s residual=%.3e threshold=%.3e%s%s\n",
                c.passed ? "PASS" : "FAIL", c.name.c_str(), c.residual,
                c.threshold, c.detail.empty() ? "" : " ",
                c.detail.c_str());
  }
  std::printf("%zu checks, %s\n", checks.size(),
              all_pass ? "all passed" : "FAILURES present");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collective risk dilemma dynamics in hybrid groups"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.model = default_model();
  std::string config_path;
  std::string preset, axis1_arg, axis2_arg, mode = "chain";

  const auto add_common = [&](CLI::App* cmd) {
    add_model_flags(cmd, cfg);
    cmd->add_option("--config", config_path,
                    "JSON config file mirroring the flag names");
    cmd->add_option("--out", cfg.out, "output file path");
    cmd->add_option("--format", cfg.format, "output format (csv|json)");
    cmd->add_option("--workers", cfg.workers,
                    "worker threads (0 = machine parallelism)");
  };

  CLI::App* stationary = app.add_subcommand(
      "stationary", "stationary distribution and metrics for one point");
  add_common(stationary);

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate a parameter grid");
  add_common(sweep);
  sweep->add_option("--preset", preset,
                    "control, fig2, fig3, fig4, fig5A, fig5B, fig5C");
  sweep->add_option("--axis1", axis1_arg, "axis as name=start:stop:count");
  sweep->add_option("--axis2", axis2_arg, "second axis, same form");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo occupancy estimate");
  add_common(simulate);
  simulate->add_option("--mode", mode, "chain or agents");
  simulate->add_option("--seed", cfg.seed, "RNG seed (mt19937_64)");
  simulate->add_option("--steps", cfg.steps, "total update steps");
  simulate->add_option("--burn-in", cfg.burn_in, "steps discarded before counting");
  simulate->add_option("--group-samples", cfg.group_samples,
                       "groups sampled per fitness estimate (agents mode)");

  CLI::App* validate =
      app.add_subcommand("validate", "run the built-in property suite");
  bool validate_literal = false;
  validate->add_flag("--literal-transitions", validate_literal,
                     "run the suite on the uncorrected transition rates");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config_file(config_path, cfg, *active);
    if (active == stationary) return cmd_stationary(cfg);
    if (active == sweep) return cmd_sweep(cfg, preset, axis1_arg, axis2_arg);
    if (active == simulate) return cmd_simulate(cfg, mode);
    if (active == validate) return cmd_validate(validate_literal);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
