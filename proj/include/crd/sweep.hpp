#ifndef CRD_SWEEP_HPP
#define CRD_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "crd/markov_engine.hpp"
#include "crd/version.hpp"

// Parameter-grid evaluation over the analytic pipeline, with presets that
// resolve to the standard heatmap and distribution-comparison configurations,
// plus CSV/JSON serialization. Grid cells are independent and may be
// evaluated on any number of workers; output order is always row-major.

namespace crd {

enum class SweepParameter { r, p, a, M, N, beta, mu, c };

inline std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::r: return "r";
    case SweepParameter::p: return "p";
    case SweepParameter::a: return "a";
    case SweepParameter::M: return "M";
    case SweepParameter::N: return "N";
    case SweepParameter::beta: return "beta";
    case SweepParameter::mu: return "mu";
    case SweepParameter::c: return "c";
  }
  throw std::logic_error("unreachable");
}

inline SweepParameter sweep_parameter_from_string(std::string_view name) {
  for (SweepParameter p :
       {SweepParameter::r, SweepParameter::p, SweepParameter::a,
        SweepParameter::M, SweepParameter::N, SweepParameter::beta,
        SweepParameter::mu, SweepParameter::c}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) +
                              "' (valid: r, p, a, M, N, beta, mu, c)");
}

enum class Metric { avg_cooperation, avg_success, stationary_distribution };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::avg_cooperation: return "avg_cooperation";
    case Metric::avg_success: return "avg_success";
    case Metric::stationary_distribution: return "stationary_distribution";
  }
  throw std::logic_error("unreachable");
}

inline Metric metric_from_string(std::string_view name) {
  for (Metric m : {Metric::avg_cooperation, Metric::avg_success,
                   Metric::stationary_distribution}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown metric '" + std::string(name) + "'");
}

struct SweepAxis {
  SweepParameter param;
  std::vector<double> values;
};

struct CellOverride {
  SweepParameter param;
  double value;
};

// Evenly spaced values including both endpoints.
inline std::vector<double> linspace(double start, double stop, int count) {
  if (count < 1) throw std::invalid_argument("linspace: count must be >= 1");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = start;
    return v;
  }
  for (int i = 0; i < count; ++i)
    v[i] = start + (stop - start) * static_cast<double>(i) / (count - 1);
  return v;
}

struct SweepSpec {
  PopulationModel base;
  std::optional<SweepAxis> axis1;  // grid mode
  std::optional<SweepAxis> axis2;
  std::vector<std::vector<CellOverride>> cells;  // list mode, exclusive with axes
  std::optional<SweepAxis> panel;  // expanded into one run per value
  std::vector<Metric> metrics;

  void validate() const;
};

struct SweepRecord {
  PopulationModel params;  // fully resolved
  std::optional<double> avg_cooperation;
  std::optional<double> avg_success;
  std::optional<std::vector<double>> stationary;
};

struct SkippedCell {
  std::size_t cell_index = 0;
  PopulationModel params;  // resolved but invalid
  std::string reason;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepRecord> records;
  std::vector<SkippedCell> skipped;
  std::string engine_version;
  std::string timestamp;  // runtime provenance; not part of serialized output
};

namespace detail {

inline bool is_integral_value(double v) { return v == std::floor(v); }

inline void check_axis_value(SweepParameter p, double v) {
  const std::string name(to_string(p));
  switch (p) {
    case SweepParameter::r:
    case SweepParameter::p:
    case SweepParameter::mu:
    case SweepParameter::c:
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument(name + " value " + std::to_string(v) +
                                    " outside [0,1]");
      break;
    case SweepParameter::beta:
      if (v < 0.0)
        throw std::invalid_argument("beta value must be >= 0");
      break;
    case SweepParameter::a:
    case SweepParameter::M:
    case SweepParameter::N:
      if (!is_integral_value(v))
        throw std::invalid_argument(name + " value " + std::to_string(v) +
                                    " must be an integer");
      if (v < 0.0 || (p != SweepParameter::a && v < 1.0))
        throw std::invalid_argument(name + " value out of range");
      break;
  }
}

inline void apply_override(PopulationModel& m, SweepParameter p, double v) {
  switch (p) {
    case SweepParameter::r: m.game.risk = v; break;
    case SweepParameter::p: m.hybrid.coop_probability = v; break;
    case SweepParameter::a: m.hybrid.agent_count = static_cast<int>(v); break;
    case SweepParameter::M: m.game.threshold = static_cast<int>(v); break;
    case SweepParameter::N: m.game.group_size = static_cast<int>(v); break;
    case SweepParameter::beta: m.selection_strength = v; break;
    case SweepParameter::mu: m.mutation_rate = v; break;
    case SweepParameter::c: m.game.cost_fraction = v; break;
  }
}

inline std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

inline void SweepSpec::validate() const {
  if (metrics.empty())
    throw std::invalid_argument("sweep: empty metric selection");
  const bool grid = axis1.has_value();
  if (axis2 && !axis1)
    throw std::invalid_argument("sweep: axis2 given without axis1");
  if (grid && !cells.empty())
    throw std::invalid_argument("sweep: axes and explicit cells are exclusive");
  if (!grid && cells.empty())
    throw std::invalid_argument("sweep: need an axis or explicit cells");
  for (const auto* ax : {axis1 ? &*axis1 : nullptr, axis2 ? &*axis2 : nullptr,
                         panel ? &*panel : nullptr}) {
    if (!ax) continue;
    if (ax->values.empty()) throw std::invalid_argument("sweep: empty axis");
    for (double v : ax->values) detail::check_axis_value(ax->param, v);
  }
  for (const auto& cell : cells)
    for (const auto& ov : cell) detail::check_axis_value(ov.param, ov.value);
}

// One (label, spec) pair per panel value; the label is empty when the spec
// has no panel axis.
inline std::vector<std::pair<std::string, SweepSpec>> expand_panels(
    const SweepSpec& spec) {
  std::vector<std::pair<std::string, SweepSpec>> out;
  if (!spec.panel) {
    out.emplace_back("", spec);
    return out;
  }
  for (double v : spec.panel->values) {
    SweepSpec s = spec;
    s.panel.reset();
    detail::apply_override(s.base, spec.panel->param, v);
    out.emplace_back(
        std::string(to_string(spec.panel->param)) + detail::format_g12(v), s);
  }
  return out;
}

inline SweepResult run_sweep(const SweepSpec& spec, int workers = 0) {
  spec.validate();
  if (spec.panel)
    throw std::invalid_argument("run_sweep: expand panels before running");

  // resolve every cell in row-major order
  std::vector<PopulationModel> resolved;
  if (spec.axis1) {
    const std::vector<double> inner =
        spec.axis2 ? spec.axis2->values : std::vector<double>{0.0};
    for (double v1 : spec.axis1->values) {
      for (std::size_t j = 0; j < inner.size(); ++j) {
        PopulationModel m = spec.base;
        detail::apply_override(m, spec.axis1->param, v1);
        if (spec.axis2) detail::apply_override(m, spec.axis2->param, inner[j]);
        resolved.push_back(m);
      }
    }
  } else {
    for (const auto& cell : spec.cells) {
      PopulationModel m = spec.base;
      for (const auto& ov : cell) detail::apply_override(m, ov.param, ov.value);
      resolved.push_back(m);
    }
  }

  SweepResult result;
  result.spec = spec;
  result.engine_version = std::string(kEngineVersion);
  result.timestamp = detail::utc_timestamp();

  // classify cells; invalid ones are skipped with the violation message
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < resolved.size(); ++i) {
    try {
      resolved[i].validate();
      valid.push_back(i);
    } catch (const std::exception& e) {
      result.skipped.push_back({i, resolved[i], e.what()});
    }
  }

  const bool want_coop = std::find(spec.metrics.begin(), spec.metrics.end(),
                                   Metric::avg_cooperation) != spec.metrics.end();
  const bool want_success = std::find(spec.metrics.begin(), spec.metrics.end(),
                                      Metric::avg_success) != spec.metrics.end();
  const bool want_dist =
      std::find(spec.metrics.begin(), spec.metrics.end(),
                Metric::stationary_distribution) != spec.metrics.end();

  std::vector<SweepRecord> records(valid.size());
  const auto evaluate = [&](std::size_t slot) {
    const PopulationModel& m = resolved[valid[slot]];
    SweepRecord rec;
    rec.params = m;
    const StationaryDistribution d = stationary_product_form(m);
    if (want_coop) rec.avg_cooperation = average_cooperation(d);
    if (want_success) rec.avg_success = average_group_success(d, m);
    if (want_dist) rec.stationary = d.probabilities;
    records[slot] = std::move(rec);
  };

  std::size_t n_workers =
      workers > 0 ? static_cast<std::size_t>(workers)
                  : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min(n_workers, valid.size() ? valid.size() : std::size_t{1});

  if (n_workers <= 1) {
    for (std::size_t i = 0; i < valid.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= valid.size() || failed.load()) return;
          try {
            evaluate(i);
          } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!failed.exchange(true)) first_error = e.what();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("sweep cell failed: " + first_error);
  }

  result.records = std::move(records);
  return result;
}

// ---------------------------------------------------------------------------
// figure presets
// ---------------------------------------------------------------------------

// Canonical parameter set shared by all presets: Z=100, mu=0.01, beta=2,
// b=1, c=0.1, with N=6, M=3, a=0, p=0, r=0.5 as the base game.
inline PopulationModel canonical_model() {
  PopulationModel m;
  m.population_size = 100;
  m.mutation_rate = 0.01;
  m.selection_strength = 2.0;
  m.game = GameParams{6, 3, 0.5, 1.0, 0.1};
  m.hybrid = HybridPolicy{0, 0.0};
  return m;
}

inline constexpr int kDefaultAxisPoints = 51;

inline SweepSpec figure_preset(std::string_view name) {
  SweepSpec spec;
  spec.base = canonical_model();
  spec.metrics = {Metric::avg_cooperation, Metric::avg_success};
  const auto prob_axis = [](SweepParameter p) {
    return SweepAxis{p, linspace(0.0, 1.0, kDefaultAxisPoints)};
  };
  if (name == "control" || name == "fig3") {
    spec.axis1 = prob_axis(SweepParameter::r);
    return spec;
  }
  if (name == "fig2") {
    spec.base.game.risk = 0.9;
    spec.axis1 = prob_axis(SweepParameter::p);
    spec.axis2 = SweepAxis{SweepParameter::a, linspace(0.0, 5.0, 6)};
    spec.panel = SweepAxis{SweepParameter::M, {1.0, 3.0, 5.0}};
    return spec;
  }
  if (name == "fig4") {
    spec.axis1 = prob_axis(SweepParameter::r);
    spec.axis2 = prob_axis(SweepParameter::p);
    spec.panel = SweepAxis{SweepParameter::a, {1.0, 2.0, 3.0}};
    return spec;
  }
  spec.metrics = {Metric::avg_cooperation, Metric::avg_success,
                  Metric::stationary_distribution};
  if (name == "fig5A") {
    // fixed N-a = 5 and M = 2: adding p=0 agents matches adding none
    for (const auto& cell : {std::pair{5, 0}, std::pair{6, 1}, std::pair{7, 2}})
      spec.cells.push_back({{SweepParameter::N, double(cell.first)},
                            {SweepParameter::a, double(cell.second)},
                            {SweepParameter::M, 2.0},
                            {SweepParameter::p, 0.0}});
    return spec;
  }
  if (name == "fig5B") {
    // fixed N-a = 4 and M-a = 2: fully cooperative agents shift both N and M
    spec.cells.push_back({{SweepParameter::N, 6.0},
                          {SweepParameter::a, 2.0},
                          {SweepParameter::M, 4.0},
                          {SweepParameter::p, 1.0}});
    spec.cells.push_back({{SweepParameter::N, 4.0},
                          {SweepParameter::a, 0.0},
                          {SweepParameter::M, 2.0},
                          {SweepParameter::p, 0.0}});
    return spec;
  }
  if (name == "fig5C") {
    // equal expected agent effort p*a = 1, different (a, p) mixes
    for (const auto& cell :
         {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}, std::pair{4.0, 0.25}})
      spec.cells.push_back({{SweepParameter::a, cell.first},
                            {SweepParameter::p, cell.second}});
    return spec;
  }
  throw std::invalid_argument(
      "unknown preset '" + std::string(name) +
      "' (valid: control, fig2, fig3, fig4, fig5A, fig5B, fig5C)");
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

using json = nlohmann::ordered_json;

namespace detail {

inline json params_to_json(const PopulationModel& m) {
  json j;
  j["Z"] = m.population_size;
  j["mu"] = m.mutation_rate;
  j["beta"] = m.selection_strength;
  j["b"] = m.game.endowment;
  j["c"] = m.game.cost_fraction;
  j["N"] = m.game.group_size;
  j["M"] = m.game.threshold;
  j["a"] = m.hybrid.agent_count;
  j["p"] = m.hybrid.coop_probability;
  j["r"] = m.game.risk;
  j["literal_transitions"] = m.literal_transitions;
  return j;
}

inline PopulationModel params_from_json(const json& j) {
  PopulationModel m;
  m.population_size = j.at("Z").get<int>();
  m.mutation_rate = j.at("mu").get<double>();
  m.selection_strength = j.at("beta").get<double>();
  m.game.endowment = j.at("b").get<double>();
  m.game.cost_fraction = j.at("c").get<double>();
  m.game.group_size = j.at("N").get<int>();
  m.game.threshold = j.at("M").get<int>();
  m.hybrid.agent_count = j.at("a").get<int>();
  m.hybrid.coop_probability = j.at("p").get<double>();
  m.game.risk = j.at("r").get<double>();
  m.literal_transitions = j.value("literal_transitions", false);
  return m;
}

inline json axis_to_json(const SweepAxis& ax) {
  json j;
  j["param"] = std::string(to_string(ax.param));
  j["values"] = ax.values;
  return j;
}

inline SweepAxis axis_from_json(const json& j) {
  SweepAxis ax;
  ax.param = sweep_parameter_from_string(j.at("param").get<std::string>());
  ax.values = j.at("values").get<std::vector<double>>();
  return ax;
}

inline json spec_to_json(const SweepSpec& spec) {
  json j;
  j["base"] = params_to_json(spec.base);
  j["axis1"] = spec.axis1 ? axis_to_json(*spec.axis1) : json(nullptr);
  j["axis2"] = spec.axis2 ? axis_to_json(*spec.axis2) : json(nullptr);
  j["panel"] = spec.panel ? axis_to_json(*spec.panel) : json(nullptr);
  json cells = json::array();
  for (const auto& cell : spec.cells) {
    json c = json::array();
    for (const auto& ov : cell) {
      json o;
      o["param"] = std::string(to_string(ov.param));
      o["value"] = ov.value;
      c.push_back(o);
    }
    cells.push_back(c);
  }
  j["cells"] = cells;
  json metrics = json::array();
  for (Metric m : spec.metrics) metrics.push_back(std::string(to_string(m)));
  j["metrics"] = metrics;
  return j;
}

inline SweepSpec spec_from_json(const json& j) {
  SweepSpec spec;
  spec.base = params_from_json(j.at("base"));
  if (!j.at("axis1").is_null()) spec.axis1 = axis_from_json(j.at("axis1"));
  if (!j.at("axis2").is_null()) spec.axis2 = axis_from_json(j.at("axis2"));
  if (!j.at("panel").is_null()) spec.panel = axis_from_json(j.at("panel"));
  for (const auto& cell : j.at("cells")) {
    std::vector<CellOverride> c;
    for (const auto& o : cell)
      c.push_back({sweep_parameter_from_string(o.at("param").get<std::string>()),
                   o.at("value").get<double>()});
    spec.cells.push_back(std::move(c));
  }
  for (const auto& m : j.at("metrics"))
    spec.metrics.push_back(metric_from_string(m.get<std::string>()));
  return spec;
}

}  // namespace detail

inline json to_json(const SweepResult& result) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["engine_version"] = result.engine_version;
  j["spec"] = detail::spec_to_json(result.spec);
  json records = json::array();
  for (const auto& rec : result.records) {
    json r;
    r["params"] = detail::params_to_json(rec.params);
    if (rec.avg_cooperation) r["avg_cooperation"] = *rec.avg_cooperation;
    if (rec.avg_success) r["avg_success"] = *rec.avg_success;
    if (rec.stationary) r["stationary_distribution"] = *rec.stationary;
    records.push_back(r);
  }
  j["records"] = records;
  json skipped = json::array();
  for (const auto& s : result.skipped) {
    json r;
    r["cell_index"] = s.cell_index;
    r["params"] = detail::params_to_json(s.params);
    r["reason"] = s.reason;
    skipped.push_back(r);
  }
  j["skipped"] = skipped;
  return j;
}

inline SweepResult sweep_result_from_json(const json& j) {
  SweepResult result;
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw std::runtime_error("unsupported schema_version");
  result.engine_version = j.at("engine_version").get<std::string>();
  result.spec = detail::spec_from_json(j.at("spec"));
  for (const auto& r : j.at("records")) {
    SweepRecord rec;
    rec.params = detail::params_from_json(r.at("params"));
    if (r.contains("avg_cooperation"))
      rec.avg_cooperation = r.at("avg_cooperation").get<double>();
    if (r.contains("avg_success"))
      rec.avg_success = r.at("avg_success").get<double>();
    if (r.contains("stationary_distribution"))
      rec.stationary = r.at("stationary_distribution").get<std::vector<double>>();
    result.records.push_back(std::move(rec));
  }
  for (const auto& s : j.at("skipped")) {
    SkippedCell sk;
    sk.cell_index = s.at("cell_index").get<std::size_t>();
    sk.params = detail::params_from_json(s.at("params"));
    sk.reason = s.at("reason").get<std::string>();
    result.skipped.push_back(std::move(sk));
  }
  return result;
}

inline void write_json(const SweepResult& result, std::ostream& os) {
  if (result.spec.metrics.empty())
    throw std::invalid_argument("write_json: empty metric selection");
  os << to_json(result).dump(2) << '\n';
  if (!os) throw std::runtime_error("write_json: stream write failed");
}

inline void write_json(const SweepResult& result,
                       const std::filesystem::path& destination) {
  std::ofstream os(destination);
  if (!os)
    throw std::runtime_error("write_json: cannot open " + destination.string());
  write_json(result, os);
}

// Fixed schema: Z,mu,beta,b,c,N,M,a,p,r,avg_cooperation,avg_success with
// 12 significant digits; skipped cells are absent (they live in the JSON
// side-log / SweepResult::skipped).
inline void write_csv(const SweepResult& result, std::ostream& os) {
  if (result.spec.metrics.empty())
    throw std::invalid_argument("write_csv: empty metric selection");
  os << "Z,mu,beta,b,c,N,M,a,p,r,avg_cooperation,avg_success\n";
  for (const auto& rec : result.records) {
    if (!rec.avg_cooperation || !rec.avg_success)
      throw std::runtime_error(
          "write_csv: records lack scalar metrics; request avg_cooperation and "
          "avg_success or use json");
    const PopulationModel& m = rec.params;
    os << m.population_size << ',' << detail::format_g12(m.mutation_rate) << ','
       << detail::format_g12(m.selection_strength) << ','
       << detail::format_g12(m.game.endowment) << ','
       << detail::format_g12(m.game.cost_fraction) << ',' << m.game.group_size
       << ',' << m.game.threshold << ',' << m.hybrid.agent_count << ','
       << detail::format_g12(m.hybrid.coop_probability) << ','
       << detail::format_g12(m.game.risk) << ','
       << detail::format_g12(*rec.avg_cooperation) << ','
       << detail::format_g12(*rec.avg_success) << '\n';
  }
  if (!os) throw std::runtime_error("write_csv: stream write failed");
}

inline void write_csv(const SweepResult& result,
                      const std::filesystem::path& destination) {
  std::ofstream os(destination);
  if (!os)
    throw std::runtime_error("write_csv: cannot open " + destination.string());
  write_csv(result, os);
}

}  // namespace crd

#endif  // CRD_SWEEP_HPP
