#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shotnoise/harness.hpp"

namespace fs = std::filesystem;
using namespace shotnoise;

namespace {

int print_diagnostics(const Scenario& sc) {
  int errors = 0;
  for (const auto& d : validate_scenario(sc)) {
    const bool is_error = d.severity == Diagnostic::Severity::error;
    errors += is_error;
    std::cerr << (is_error ? "error: " : "warning: ") << d.message << '\n';
  }
  return errors;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shot-noise traffic simulator and limit-theorem checks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "report";
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "run a scenario and write its report");
  run_cmd->add_option("--scenario", scenario_path, "scenario YAML file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "report directory");
  run_cmd->add_option("--workers", workers, "replicate worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "master seed (overrides the file)");

  auto* validate_cmd = app.add_subcommand("validate", "check a scenario file");
  validate_cmd->add_option("--scenario", scenario_path, "scenario YAML file")->required()->check(CLI::ExistingFile);

  auto* demo_cmd = app.add_subcommand("demo", "write the built-in scenarios");
  demo_cmd->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo_cmd) {
      fs::create_directories(out_dir);
      for (const auto& [name, yaml] : demo_scenarios()) {
        const auto p = fs::path(out_dir) / (name + ".yaml");
        std::ofstream(p) << yaml;
        std::cout << p.string() << '\n';
      }
      return 0;
    }

    auto sc = load_scenario(scenario_path);
    if (*validate_cmd) {
      const int errors = print_diagnostics(sc);
      if (errors == 0) std::cout << "ok\n";
      return errors == 0 ? 0 : 2;
    }

    if (seed) sc.seed = *seed;
    if (workers) sc.workers = *workers;
    sc.echo = scenario_echo(sc);
    if (print_diagnostics(sc) > 0) return 2;
    const auto report = run(sc);
    for (const auto& f : emit(report, EmitFormat::csv_bundle, out_dir)) std::cout << f.string() << '\n';
    for (const auto& f : emit(report, EmitFormat::structured_text, out_dir)) std::cout << f.string() << '\n';
    for (const auto& g : report.gof)
      std::cout << (g.passed ? "pass " : "FAIL ") << g.method << " statistic=" << g.statistic
                << " threshold=" << g.threshold << '\n';
    return report.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
