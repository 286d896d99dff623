#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "shotnoise/errors.hpp"
#include "shotnoise/harness.hpp"

namespace shotnoise {

namespace {

using nlohmann::json;

template <class T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
  if (!node || !node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ParameterError(std::string("scenario: bad value for '") + key + "': " + e.what());
  }
}

std::string required_string(const YAML::Node& node, const char* key, const char* where) {
  if (!node[key]) throw ParameterError(std::string("scenario: ") + where + " needs '" + key + "'");
  return node[key].as<std::string>();
}

TailDist parse_durations(const YAML::Node& node, json& echo) {
  const auto kind = get_or<std::string>(node, "kind", "pareto");
  if (kind != "pareto") throw ParameterError("scenario: durations.kind must be 'pareto'");
  const double alpha = get_or(node, "alpha", 1.5);
  const double xm = get_or(node, "xm", 1.0);
  echo = {{"kind", kind}, {"alpha", alpha}, {"xm", xm}};
  return TailDist::pareto(alpha, xm);
}

RateModel parse_rates(const YAML::Node& node, json& echo) {
  const auto kind = get_or<std::string>(node, "kind", "constant");
  if (kind == "constant") {
    const double w0 = get_or(node, "w0", 1.0);
    echo = {{"kind", kind}, {"w0", w0}};
    return ConstantRate{w0};
  }
  if (kind == "independent") {
    const auto dist = required_string(node, "dist", "rates");
    if (dist == "uniform") {
      const double lo = get_or(node, "lo", 0.0), hi = get_or(node, "hi", 1.0);
      echo = {{"kind", kind}, {"dist", dist}, {"lo", lo}, {"hi", hi}};
      return uniform_rate(lo, hi);
    }
    if (dist == "exponential") {
      const double mean = get_or(node, "mean", 1.0);
      echo = {{"kind", kind}, {"dist", dist}, {"mean", mean}};
      return exponential_rate(mean);
    }
    if (dist == "discrete") {
      const auto values = get_or(node, "values", std::vector<double>{1.0});
      const auto probs = get_or(node, "probs", std::vector<double>(values.size(), 1.0));
      echo = {{"kind", kind}, {"dist", dist}, {"values", values}, {"probs", probs}};
      return discrete_rate(values, probs);
    }
    throw ParameterError("scenario: unknown independent rate dist '" + dist + "'");
  }
  if (kind == "deterministic") {
    const auto form = get_or<std::string>(node, "form", "saturating");
    if (form != "saturating") throw ParameterError("scenario: deterministic form must be 'saturating'");
    const double w_limit = get_or(node, "w_limit", 1.0);
    echo = {{"kind", kind}, {"form", form}, {"w_limit", w_limit}};
    return saturating_rate(w_limit);
  }
  throw ParameterError("scenario: unknown rate kind '" + kind + "'");
}

WindowFunctional parse_functional(const YAML::Node& node, json& echo) {
  const auto name = required_string(node, "name", "functional");
  const auto kind = required_string(node, "kind", "functional");
  WindowFunctional phi;
  echo = {{"name", name}, {"kind", kind}};
  if (kind == "identity") {
    phi = identity_functional();
  } else if (kind == "clipped") {
    const double cap = get_or(node, "cap", 1.0);
    echo["cap"] = cap;
    phi = clipped_rate(cap);
  } else if (kind == "idle") {
    phi = idle_indicator();
  } else if (kind == "cdf") {
    const double x = get_or(node, "x", 1.0);
    echo["x"] = x;
    phi = level_cdf_indicator(x);
  } else if (kind == "constant") {
    const double c = get_or(node, "c", 1.0);
    echo["c"] = c;
    phi = constant_functional(c);
  } else if (kind == "window_sup") {
    const double h = get_or(node, "h", 1.0), cap = get_or(node, "cap", 1.0);
    echo["h"] = h;
    echo["cap"] = cap;
    phi = window_sup_indicator(h, cap);
  } else if (kind == "growth") {
    const double h = get_or(node, "h", 1.0);
    echo["h"] = h;
    phi = growth_indicator(h);
  } else {
    throw ParameterError("scenario: unknown functional kind '" + kind + "'");
  }
  phi.rename(name);
  return phi;
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ParameterError(std::string("scenario: YAML parse error: ") + e.what());
  }
  Scenario sc;
  json traffic_echo, durations_echo, rates_echo;
  const auto traffic = root["traffic"];
  sc.traffic.lambda = get_or(traffic, "lambda", 1.0);
  sc.traffic.horizon = get_or(traffic, "horizon", 2.0e6);
  sc.traffic.window_h = get_or(traffic, "window_h", 0.0);
  sc.traffic.stationary_init = get_or(traffic, "stationary_init", true);
  const bool asserted = get_or(traffic, "assert_tail_condition", true);
  auto durations = parse_durations(traffic ? traffic["durations"] : YAML::Node(), durations_echo);
  auto rates = parse_rates(traffic ? traffic["rates"] : YAML::Node(), rates_echo);
  sc.traffic.law = JointLaw(std::move(durations), std::move(rates), asserted);

  json functionals_echo = json::array();
  if (const auto fs = root["functionals"]) {
    for (const auto& f : fs) {
      json e;
      sc.functionals.push_back(parse_functional(f, e));
      functionals_echo.push_back(e);
    }
  }

  // An absent window length defaults to the longest functional window.
  if (!traffic || !traffic["window_h"])
    for (const auto& f : sc.functionals) sc.traffic.window_h = std::max(sc.traffic.window_h, f.h());

  sc.seed = get_or<std::uint64_t>(root, "seed", sc.seed);
  sc.workers = get_or<std::size_t>(root, "workers", sc.workers);
  sc.T_ladder = get_or(root, "T_ladder", sc.T_ladder);
  sc.replicates = get_or<std::size_t>(root, "replicates", sc.replicates);
  sc.u_grid = get_or(root, "u_grid", sc.u_grid);
  sc.x_grid = get_or(root, "x_grid", sc.x_grid);
  for (const auto& name : get_or(root, "analyses", std::vector<std::string>{}))
    sc.analyses.insert(analysis_from_string(name));

  const auto cycles = root["cycles"];
  sc.n_cycles = get_or<std::size_t>(cycles, "n_cycles", sc.n_cycles);
  sc.tail_t_grid = get_or(cycles, "tail_t_grid", sc.tail_t_grid);
  sc.tail_x_grid = get_or(cycles, "tail_x_grid", sc.tail_x_grid);
  sc.hill_k = get_or<std::size_t>(cycles, "hill_k", sc.hill_k);

  const auto limits = root["limits"];
  sc.level = get_or(limits, "level", sc.level);
  sc.n_mc = get_or<std::size_t>(limits, "n_mc", sc.n_mc);
  sc.reference_n = get_or<std::size_t>(limits, "reference_n", sc.reference_n);

  sc.grid_n = get_or<std::size_t>(root["m1"], "grid_n", sc.grid_n);

  sc.echo = {{"traffic", {{"durations", durations_echo}, {"rates", rates_echo}}},
             {"functionals", functionals_echo}};
  sc.echo = scenario_echo(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParameterError("scenario: cannot open " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

json scenario_echo(const Scenario& sc) {
  json echo = sc.echo.is_object() ? sc.echo : json::object();
  auto& traffic = echo["traffic"];
  traffic["lambda"] = sc.traffic.lambda;
  traffic["horizon"] = sc.traffic.horizon;
  traffic["window_h"] = sc.traffic.window_h;
  traffic["stationary_init"] = sc.traffic.stationary_init;
  traffic["assert_tail_condition"] = sc.traffic.law.tail_assumption_asserted();
  if (!echo.contains("functionals")) {
    echo["functionals"] = json::array();
    for (const auto& f : sc.functionals) echo["functionals"].push_back({{"name", f.name()}});
  }
  echo["seed"] = sc.seed;
  echo["workers"] = sc.workers;
  echo["T_ladder"] = sc.T_ladder;
  echo["replicates"] = sc.replicates;
  echo["u_grid"] = sc.u_grid;
  echo["x_grid"] = sc.x_grid;
  std::vector<std::string> names;
  for (auto a : sc.analyses) names.push_back(to_string(a));
  echo["analyses"] = names;
  echo["cycles"] = {{"n_cycles", sc.n_cycles},
                    {"tail_t_grid", sc.tail_t_grid},
                    {"tail_x_grid", sc.tail_x_grid},
                    {"hill_k", sc.hill_k}};
  echo["limits"] = {{"level", sc.level}, {"n_mc", sc.n_mc}, {"reference_n", sc.reference_n}};
  echo["m1"] = {{"grid_n", sc.grid_n}};
  return echo;
}

std::vector<Diagnostic> validate_scenario(const Scenario& sc) {
  std::vector<Diagnostic> out;
  const auto error = [&](std::string m) { out.push_back({Diagnostic::Severity::error, std::move(m)}); };
  const auto warn = [&](std::string m) { out.push_back({Diagnostic::Severity::warning, std::move(m)}); };
  try {
    sc.traffic.validate();
  } catch (const std::exception& e) {
    error(e.what());
  }
  const double alpha = sc.traffic.law.y_dist().alpha();
  if (!(alpha > 1.0 && alpha < 2.0)) error("durations: tail index must lie in (1, 2) for the limit theorems");
  if (!sc.traffic.law.tail_assumption_asserted())
    warn("traffic: the joint regular-variation condition on (Y, W) is not asserted");
  if (sc.replicates < 1) error("replicates must be at least 1");
  if (sc.T_ladder.empty()) error("T_ladder must not be empty");
  for (std::size_t i = 0; i < sc.T_ladder.size(); ++i) {
    if (!(sc.T_ladder[i] > 1.0)) error("T_ladder entries must exceed 1");
    if (i > 0 && !(sc.T_ladder[i] > sc.T_ladder[i - 1])) error("T_ladder must be strictly increasing");
  }
  for (double u : sc.u_grid)
    if (!(u > 0.0 && u <= 1.0)) error("u_grid entries must lie in (0, 1]");
  if (!std::is_sorted(sc.x_grid.begin(), sc.x_grid.end())) error("x_grid must be sorted");
  std::set<std::string> names;
  for (const auto& f : sc.functionals) {
    if (!names.insert(f.name()).second) error("functional name '" + f.name() + "' is not unique");
    if (f.h() > sc.traffic.window_h)
      error("functional '" + f.name() + "' needs a longer traffic.window_h");
    if (!f.continuity_assertion())
      warn("functional '" + f.name() + "': continuity of E(., phi) is not asserted");
  }
  const bool needs_functionals = sc.analyses.count(Analysis::stable_limit) ||
                                 sc.analyses.count(Analysis::self_similarity) ||
                                 sc.analyses.count(Analysis::m1_diagnostic);
  if (needs_functionals && sc.functionals.empty()) error("limit analyses need at least one functional");
  if (sc.analyses.count(Analysis::cdf_rate) && sc.T_ladder.size() < 3)
    error("cdf_rate needs at least 3 ladder points");
  if (sc.analyses.count(Analysis::hill) && sc.hill_k >= sc.n_cycles) error("hill_k must be below n_cycles");
  if (!(sc.level > 0.0 && sc.level < 1.0)) error("limits.level must lie in (0, 1)");
  if (sc.grid_n < 8) error("m1.grid_n must be at least 8");
  if (sc.workers < 1) error("workers must be at least 1");
  return out;
}

std::vector<std::pair<std::string, std::string>> demo_scenarios() {
  return {
      {"cycles", R"(seed: 11
traffic:
  lambda: 1.0
  horizon: 1000000
  durations: {kind: pareto, alpha: 1.5, xm: 1.0}
  rates: {kind: constant, w0: 1.0}
analyses: [cycle_mean, cycle_tail, hill]
cycles:
  n_cycles: 100000
  tail_t_grid: [1000]
  tail_x_grid: [1, 2]
  hill_k: 1000
)"},
      {"stable_identity", R"(seed: 21
traffic:
  lambda: 1.0
  durations: {kind: pareto, alpha: 1.5, xm: 1.0}
  rates: {kind: constant, w0: 1.0}
functionals:
  - {name: identity, kind: identity}
T_ladder: [1000, 10000]
replicates: 2000
u_grid: [0.25, 1.0]
analyses: [stable_limit, self_similarity, m1_diagnostic]
limits: {level: 0.01, n_mc: 1000000, reference_n: 10000}
)"},
      {"idle_skew", R"(seed: 31
traffic:
  lambda: 0.3
  durations: {kind: pareto, alpha: 1.5, xm: 1.0}
  rates: {kind: constant, w0: 1.0}
functionals:
  - {name: idle, kind: idle}
T_ladder: [1000, 10000]
replicates: 2000
analyses: [stable_limit]
)"},
      {"cdf_rate", R"(seed: 41
traffic:
  lambda: 1.0
  durations: {kind: pareto, alpha: 1.5, xm: 1.0}
  rates: {kind: constant, w0: 1.0}
T_ladder: [1000, 10000, 100000]
replicates: 500
x_grid: [1.0]
analyses: [cdf_rate]
)"},
  };
}

}  // namespace shotnoise
