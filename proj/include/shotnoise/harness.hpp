#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shotnoise/functional.hpp"
#include "shotnoise/stats.hpp"
#include "shotnoise/traffic.hpp"

namespace shotnoise {

enum class Analysis {
  cycle_mean,
  cycle_tail,
  hill,
  stable_limit,
  self_similarity,
  cdf_rate,
  m1_diagnostic
};

std::string to_string(Analysis a);
Analysis analysis_from_string(const std::string& name);

struct Scenario {
  TrafficConfig traffic;
  std::vector<WindowFunctional> functionals;
  std::vector<double> T_ladder{1000.0, 10000.0};
  std::size_t replicates = 200;
  std::vector<double> u_grid{0.25, 1.0};
  std::vector<double> x_grid{1.0};
  std::set<Analysis> analyses;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  // cycle analyses
  std::size_t n_cycles = 100000;
  std::vector<double> tail_t_grid{1000.0};
  std::vector<double> tail_x_grid{1.0, 2.0};
  std::size_t hill_k = 1000;

  // limit analyses
  double level = 0.01;
  std::size_t n_mc = 1000000;
  std::size_t reference_n = 10000;

  std::size_t grid_n = 128;

  // Every setting, defaults included, as parsed.
  nlohmann::json echo;
};

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string message;
};

Scenario parse_scenario(const std::string& yaml_text);
Scenario load_scenario(const std::filesystem::path& file);
std::vector<Diagnostic> validate_scenario(const Scenario& scenario);
// Rebuilds the echo record from the current field values.
nlohmann::json scenario_echo(const Scenario& scenario);

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Report {
  nlohmann::json scenario;
  nlohmann::json analyses = nlohmann::json::object();
  std::vector<Table> tables;
  std::vector<GofReport> gof;
  nlohmann::json provenance;

  bool all_passed() const;
  // Scenario echo and analysis blocks, without wall-clock provenance.
  std::string body() const;
};

Report run(const Scenario& scenario);

enum class EmitFormat { csv_bundle, structured_text };
// Writes into out_dir and returns the created files.
std::vector<std::filesystem::path> emit(const Report& report, EmitFormat format,
                                        const std::filesystem::path& out_dir);

// Built-in acceptance-style scenarios as YAML documents, keyed by name.
std::vector<std::pair<std::string, std::string>> demo_scenarios();

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace shotnoise
