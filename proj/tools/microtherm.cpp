// Batch front-end: microtherm run|check|dispersion <config>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include "microtherm/error.hpp"
#include "microtherm/scenario.hpp"

namespace {

constexpr int kExitFailedCertificate = 1;
constexpr int kExitError = 2;

int run_and_report(const microtherm::Scenario& s) {
  const microtherm::RunOutcome out = microtherm::run_scenario(s);
  std::cout << out.report;
  return out.exit_code == 0 ? 0 : kExitFailedCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermoelasticity with microtemperatures: batch simulations, spectra and dispersion sweeps"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run every task enabled in the scenario");
  run->add_option("config", config, "scenario file")->required();
  run->add_option("--out", out_dir, "output directory (overrides [tasks] output_dir)");
  run->add_option("--seed", seed, "seed for random initial data and probes");

  auto* check = app.add_subcommand("check", "parse and validate a scenario without running it");
  check->add_option("config", config, "scenario file")->required();

  auto* disp = app.add_subcommand("dispersion", "run only the dispersion sweep of a scenario");
  disp->add_option("config", config, "scenario file")->required();
  disp->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    microtherm::Scenario s = microtherm::load_scenario(config);
    if (!out_dir.empty()) s.output_dir = out_dir;
    if (seed) s.seed = *seed;

    if (*check) {
      std::cout << "ok: " << config << " (" << microtherm::model_name(s.model) << ", n_interior=" << s.n_interior
                << ", tasks:";
      if (s.tasks.empty()) std::cout << " none";
      for (auto t : s.tasks) std::cout << ' ' << microtherm::task_name(t);
      std::cout << ")\n";
      return 0;
    }
    if (*disp) s.tasks = {microtherm::Task::dispersion};
    return run_and_report(s);
  } catch (const microtherm::ParseError& e) {
    std::cerr << config << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitError;
}
