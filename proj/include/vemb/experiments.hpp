#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vemb/analysis.hpp"
#include "vemb/config.hpp"
#include "vemb/manufactured.hpp"

namespace vemb {

/// Errors of one manufactured-solution run.
struct ErrorRow {
  int n = 0;
  double h = 0.0;  ///< nominal mesh size 1/n
  double dt = 0.0;
  int free_dofs = 0;
  double psi_L2H2 = 0.0;
  double theta_L2H1 = 0.0;
  double psi_LinfH1 = 0.0;
  double theta_LinfL2 = 0.0;
  int max_newton_iterations = 0;
};

struct ManufacturedRun {
  MeshFamily family = MeshFamily::quad_uniform;
  int n = 4;
  std::uint64_t seed = 0;
  int k = 2;
  int ell = 1;
  double nu = 1.0;
  double kappa = 1.0;
  double dt = 0.25;
  double t_final = 1.0;
  double newton_tol = 1e-8;
  int newton_max_iter = 25;
  InitialMode initial = InitialMode::interpolate;
};

/// Marches the manufactured solution and accumulates the error quantities.
ErrorRow run_manufactured(const SeparableSolution& exact, const ManufacturedRun& run);

struct AccuracyReport {
  std::vector<ErrorRow> rows;
  /// Rates against the previous row with the same schedule group; order
  /// psi_L2H2, theta_L2H1, psi_LinfH1, theta_LinfL2.
  std::vector<std::array<std::optional<double>, 4>> rates;
};

AccuracyReport run_accuracy(const ExperimentConfig& config);

struct ViscosityRow {
  double nu = 0.0;
  ErrorRow errors;
  bool converged = true;
  std::string failure;
};

std::vector<ViscosityRow> run_small_viscosity(const ExperimentConfig& config);

struct CavityReport {
  double ra = 0.0;
  int steps = 0;
  double time = 0.0;
  bool stopped_early = false;
  int total_newton_iterations = 0;
  Profile u2_horizontal;  ///< vertical velocity on y = 0.5
  Profile u1_vertical;    ///< horizontal velocity on x = 0.5
  Profile nusselt_left;
  Profile nusselt_right;
  SolutionState state;
};

/// Problem data of the differentially heated cavity.
Problem cavity_problem(double pr, double ra);
InitialData cavity_initial();

CavityReport run_cavity(const ExperimentConfig& config);

struct DecayReport {
  std::vector<double> energy;
  std::vector<int> newton_iterations;
  bool non_increasing = false;
};

/// Unforced decay run (f = g = 0, homogeneous boundary data).
DecayReport run_custom(const ExperimentConfig& config);

/// Legacy VTK polydata with vertex samples of psi, theta, u1, u2.
void export_fields(const Discretization& disc, const SolutionState& state, const std::filesystem::path& path);

/// Builds the mesh named by a configuration (file or generated family).
PolygonalMesh config_mesh(const ExperimentConfig& config);

/// Dispatches on config.experiment and writes every output into config.out.
void run_experiment(const ExperimentConfig& config);

}  // namespace vemb
