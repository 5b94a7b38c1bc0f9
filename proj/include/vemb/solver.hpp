#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vemb/forms.hpp"
#include "vemb/mesh.hpp"

namespace vemb {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Which walls carry a Dirichlet temperature. The stream function is clamped
/// on every boundary wall; its boundary values may be nonzero.
struct BoundarySpec {
  std::array<bool, 5> temp_dirichlet{true, true, true, true, true};  ///< indexed by Wall

  [[nodiscard]] bool dirichlet(Wall w) const noexcept { return temp_dirichlet[static_cast<int>(w)]; }
  static BoundarySpec all_dirichlet() { return {}; }
  /// Dirichlet on left/right, insulated top/bottom.
  static BoundarySpec cavity() { return BoundarySpec{{true, true, false, false, true}}; }
};

/// Global numbering: stream DOFs (3 per vertex, per-edge moments, interior
/// moments) and temperature DOFs (vertex values, edge moments, interior
/// moments). Constrained entries carry -1 in the free-index tables.
struct GlobalIndexMap {
  int k = 2;
  int ell = 1;
  int n_stream = 0;
  int n_temp = 0;
  std::vector<std::vector<int>> stream_dofs;  ///< per cell, local -> global
  std::vector<std::vector<int>> temp_dofs;
  std::vector<int> stream_free;  ///< global -> free index or -1
  std::vector<int> temp_free;
  std::vector<int> stream_free_to_global;
  std::vector<int> temp_free_to_global;
  int n_corner_conflicts = 0;  ///< vertices joining Dirichlet and insulated walls

  [[nodiscard]] int n_psi() const noexcept { return static_cast<int>(stream_free_to_global.size()); }
  [[nodiscard]] int n_theta() const noexcept { return static_cast<int>(temp_free_to_global.size()); }
  [[nodiscard]] int n_free() const noexcept { return n_psi() + n_theta(); }
};

GlobalIndexMap build_index_map(const PolygonalMesh& mesh, int k, int ell, const BoundarySpec& bc);

struct SolutionState {
  Eigen::VectorXd psi;
  Eigen::VectorXd theta;
  int step = 0;
  double time = 0.0;
};

struct TimeStepperConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  double newton_tol = 1e-8;
  int newton_max_iter = 25;
  std::optional<double> steady_state_tol;
};

using StreamTimeFunction = std::function<StreamSample(const Point&, double)>;

/// Physical parameters, forcing and boundary data of one run.
struct Problem {
  double nu = 1.0;
  double kappa = 1.0;
  VectorFunction g;  ///< empty means zero
  bool g_time_dependent = false;
  VectorFunction f_psi;          ///< empty means zero
  TimeScalarFunction f_theta;    ///< empty means zero
  StreamTimeFunction psi_boundary;    ///< empty means homogeneous clamping
  TimeScalarFunction theta_boundary;  ///< empty means zero on Dirichlet walls
  BoundarySpec bc;
  StabilizationWeights stab;
};

/// Mesh, elements, local forms and the global linear blocks of one problem.
class Discretization {
 public:
  Discretization(std::shared_ptr<const PolygonalMesh> mesh, int k, int ell, Problem problem);

  [[nodiscard]] const PolygonalMesh& mesh() const noexcept { return *mesh_; }
  [[nodiscard]] const Problem& problem() const noexcept { return problem_; }
  [[nodiscard]] const GlobalIndexMap& index() const noexcept { return index_; }
  [[nodiscard]] int k() const noexcept { return index_.k; }
  [[nodiscard]] int ell() const noexcept { return index_.ell; }
  [[nodiscard]] const StreamElement& stream(int c) const { return stream_[c]; }
  [[nodiscard]] const TempElement& temp(int c) const { return temp_[c]; }
  [[nodiscard]] const CellForms& forms(int c) const { return forms_[c]; }

  /// Global matrices over all DOFs (constrained ones included).
  [[nodiscard]] const SparseMatrix& MF() const noexcept { return MF_; }
  [[nodiscard]] const SparseMatrix& AF() const noexcept { return AF_; }
  [[nodiscard]] const SparseMatrix& MT() const noexcept { return MT_; }
  [[nodiscard]] const SparseMatrix& AT() const noexcept { return AT_; }
  /// Coupling C(w, phi): temperature rows, stream columns.
  [[nodiscard]] const SparseMatrix& C(double time) const;

  [[nodiscard]] Eigen::VectorXd gather_stream(int c, const Eigen::VectorXd& psi) const;
  [[nodiscard]] Eigen::VectorXd gather_temp(int c, const Eigen::VectorXd& theta) const;

  /// Global load vectors at time t.
  [[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> loads(double time) const;

  /// Prescribed boundary DOF values at time t written into the state vectors.
  void apply_boundary(Eigen::VectorXd& psi, Eigen::VectorXd& theta, double time) const;

  /// Global DOF vectors of smooth functions.
  [[nodiscard]] Eigen::VectorXd interpolate_stream(const StreamFunction& f) const;
  [[nodiscard]] Eigen::VectorXd interpolate_temp(const ScalarFunction& f) const;

 private:
  std::shared_ptr<const PolygonalMesh> mesh_;
  Problem problem_;
  GlobalIndexMap index_;
  std::vector<StreamElement> stream_;
  std::vector<TempElement> temp_;
  std::vector<CellForms> forms_;
  SparseMatrix MF_, AF_, MT_, AT_;
  mutable SparseMatrix C_;
  mutable double C_time_ = 0.0;
  mutable bool C_ready_ = false;
  std::vector<int> boundary_cells_;
};

enum class InitialMode { interpolate, energy_project };

/// Initial data; derivatives are only needed by the energy projection.
struct InitialData {
  StreamFunction psi0;
  std::function<std::array<double, 3>(const Point&)> psi0_hessian;  ///< xx, xy, yy
  ScalarFunction theta0;
  std::function<Point(const Point&)> theta0_grad;
};

/// Builds the state at t = 0; constrained DOFs are overwritten by the boundary data.
SolutionState set_initial_state(const Discretization& disc, const InitialData& data, InitialMode mode);

/// Full-DOF residual of the backward Euler step (rows of constrained DOFs included).
struct Residual {
  Eigen::VectorXd psi;
  Eigen::VectorXd theta;
};

Residual residual(const Discretization& disc, const SolutionState& prev, const Eigen::VectorXd& psi,
                  const Eigen::VectorXd& theta, double time, double dt);

/// Jacobian of the residual restricted to free rows and columns
/// ([psi free; theta free] ordering).
SparseMatrix jacobian(const Discretization& disc, const Eigen::VectorXd& psi, const Eigen::VectorXd& theta,
                      double time, double dt);

Eigen::VectorXd restrict_free(const GlobalIndexMap& map, const Residual& r);

/// Sparse direct solve; throws Error(singular) when the factorization fails or
/// the relative residual stays above 1e-10 after refinement.
Eigen::VectorXd linear_solve(const SparseMatrix& J, const Eigen::VectorXd& r);

struct StepReport {
  int iterations = 0;
  double last_increment = 0.0;
  std::vector<double> increments;
  double state_change = 0.0;  ///< ||x^n - x^{n-1}||_inf / dt
};

/// One backward Euler step solved by Newton's method.
class NewtonStepper {
 public:
  NewtonStepper(const Discretization& disc, TimeStepperConfig config);

  SolutionState step(const SolutionState& prev, StepReport* report = nullptr);

 private:
  const Discretization& disc_;
  TimeStepperConfig config_;
  SparseMatrix Jlin_;
  double Jlin_time_ = -1.0;
  void build_linear(double time);
};

SolutionState newton_solve_step(const Discretization& disc, const SolutionState& prev, const TimeStepperConfig& config,
                                StepReport* report = nullptr);

class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_start(const Discretization&, const SolutionState&) {}
  virtual void on_step(const Discretization& disc, const SolutionState& prev, const SolutionState& cur,
                       const StepReport& report) = 0;
  [[nodiscard]] virtual bool request_stop() const { return false; }
};

/// Discrete energy |||psi|||_F^2 + |||theta|||_T^2 after every step.
class EnergyMonitor : public Observer {
 public:
  void on_start(const Discretization& disc, const SolutionState& s) override;
  void on_step(const Discretization& disc, const SolutionState& prev, const SolutionState& cur,
               const StepReport& report) override;
  [[nodiscard]] const std::vector<double>& energies() const noexcept { return energy_; }
  /// Newton iterations of each step.
  [[nodiscard]] const std::vector<int>& iterations() const noexcept { return iterations_; }
  [[nodiscard]] bool non_increasing(double rel_tol = 1e-12) const;

 private:
  std::vector<double> energy_;
  std::vector<int> iterations_;
};

/// Fires when ||x^n - x^{n-1}||_inf / dt drops below tol.
class SteadyStateDetector : public Observer {
 public:
  explicit SteadyStateDetector(double tol) : tol_(tol) {}
  void on_step(const Discretization& disc, const SolutionState& prev, const SolutionState& cur,
               const StepReport& report) override;
  [[nodiscard]] bool request_stop() const override { return fired_; }
  [[nodiscard]] bool fired() const noexcept { return fired_; }
  [[nodiscard]] double last_rate() const noexcept { return rate_; }

 private:
  double tol_;
  double rate_ = 0.0;
  bool fired_ = false;
};

double discrete_energy(const Discretization& disc, const SolutionState& s);

struct TrajectorySummary {
  SolutionState final_state;
  int steps = 0;
  int total_newton_iterations = 0;
  int max_newton_iterations = 0;
  bool stopped_early = false;
};

TrajectorySummary run_transient(const Discretization& disc, const SolutionState& initial,
                                const TimeStepperConfig& config, const std::vector<Observer*>& observers);

/// Text checkpoint: header line, then the two DOF vectors.
void save_checkpoint(const std::filesystem::path& path, const Discretization& disc, const SolutionState& s);
SolutionState load_checkpoint(const std::filesystem::path& path, const Discretization& disc);

}  // namespace vemb
