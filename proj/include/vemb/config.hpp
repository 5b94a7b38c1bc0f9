#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vemb/mesh.hpp"
#include "vemb/solver.hpp"

namespace vemb {

enum class Experiment { accuracy, small_viscosity, cavity, custom };
enum class Schedule {
  diagonal,   ///< dt = h
  quadratic,  ///< dt = h^2
  table,      ///< every (h, dt) pair of the level list
};

std::string_view to_string(Experiment e) noexcept;
std::string_view to_string(Schedule s) noexcept;

struct ExperimentConfig {
  Experiment experiment = Experiment::cavity;
  MeshFamily mesh = MeshFamily::quad_uniform;
  std::optional<std::filesystem::path> mesh_file;
  int n = 16;
  std::uint64_t seed = 0;
  int k = 2;
  int ell = 1;
  double nu = 1.0;
  double kappa = 1.0;
  std::optional<double> pr = 0.71;
  std::optional<double> ra;
  double dt = 1e-3;
  double t_final = 1.0;
  double newton_tol = 1e-8;
  int newton_max_iter = 25;
  bool steady = false;
  double steady_tol = 1e-6;
  InitialMode initial = InitialMode::interpolate;
  Schedule schedule = Schedule::diagonal;
  std::vector<int> levels{4, 8, 16, 32};
  std::vector<double> nu_list{1.0, 1e-1, 1e-2, 1e-3};
  std::vector<double> dt_list{1.0 / 8, 1.0 / 16};
  int samples = 1000;
  bool vtk = true;
  std::filesystem::path out = "vemb-out";
};

/// Every key accepted by set_option, in the spelling used by config files and CLI flags.
const std::vector<std::string>& config_keys();

/// Sets one key from its text value; throws Error(config) on unknown keys or bad values.
void set_option(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines; `#` starts a comment. Unknown keys are errors.
std::map<std::string, std::string> parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Rejects invariant violations with Error(config).
void validate(const ExperimentConfig& config);

/// key = value text that reproduces the configuration.
std::string format_config(const ExperimentConfig& config);

}  // namespace vemb
