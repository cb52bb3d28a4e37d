#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "microtherm/discrete1d.hpp"
#include "microtherm/material.hpp"

namespace microtherm {

enum class Model { type2, type3 };

enum class Task { simulate, spectral, dispersion, backward, localization };

const char* task_name(Task t);
const char* model_name(Model m);

struct InitSpec {
  enum class Preset { sine, impulse, random, inline_values };
  Preset preset = Preset::sine;
  /// sine: mode number per field, 0 leaves the field zero
  std::map<Field, int> modes{{Field::u, 1}};
  double amplitude = 1.0;
  /// impulse: field and 1-based node (0 = middle node)
  Field impulse_field = Field::u;
  int impulse_node = 0;
  /// inline: explicit values per field; missing fields are zero
  std::map<Field, std::vector<double>> values;
};

/// A fully validated batch scenario.
struct Scenario {
  MaterialIsotropic material;
  Model model = Model::type3;
  int n_interior = 32;
  double length = 1.0;
  double dt = 1e-3;
  int n_steps = 1000;
  int snapshot_every = 1;
  InitSpec init;
  std::vector<Task> tasks;
  std::filesystem::path output_dir = "microtherm_out";
  std::uint64_t seed = 0;

  // optional sections
  int spectral_probes = 100;
  double k_min = 0.1;
  double k_max = 10.0;
  int n_k = 100;
  double backward_dt = 1e-4;
  int backward_steps = 20;
  double eps = 0.5;
  double lam = 2.0;
  std::optional<double> localization_dt;
  std::optional<int> localization_steps;

  bool has_task(Task t) const;
};

/// Parses the sectioned key = value format. Sections [material], [grid],
/// [time], [init] and [tasks] are required; [spectral], [dispersion],
/// [backward] and [localization] are optional. Unknown sections or keys are
/// errors. Throws ParseError (with line number) for syntax problems and
/// ValidationError for semantic ones.
Scenario parse_scenario(std::string_view text);

/// Reads and parses a file; throws IoError when it cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

/// Initial data described by the scenario on its grid.
State1D build_initial_data(const Scenario& s);

struct Certificate {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOutcome {
  int exit_code = 0;  ///< 0 iff every certificate passed
  std::vector<Certificate> certificates;
  std::vector<std::string> notes;
  std::string report;  ///< contents written to report.txt
};

/// Runs every enabled task and writes energy.csv, spectrum.csv,
/// dispersion.csv, backward.csv and report.txt into s.output_dir.
RunOutcome run_scenario(const Scenario& s);

/// "%.17g" formatting used by every CSV writer.
std::string format_double(double x);

}  // namespace microtherm
