#pragma once

#include <array>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "vemb/solver.hpp"

namespace vemb {

/// Exact solution at one time level, with the derivatives the error norms need.
struct ExactFields {
  std::function<double(const Point&)> psi;
  std::function<Point(const Point&)> psi_grad;
  std::function<std::array<double, 3>(const Point&)> psi_hessian;  ///< xx, xy, yy
  ScalarFunction theta;
  std::function<Point(const Point&)> theta_grad;
};

/// Global errors of the projected discrete solution at one time level.
struct StepErrors {
  double psi_H2 = 0.0;    ///< |psi - Pi^D psi_h|_{2,h}
  double psi_H1 = 0.0;    ///< |psi - Pi^D psi_h|_{1,h}
  double theta_H1 = 0.0;  ///< |theta - Pi^nabla theta_h|_{1,h}
  double theta_L2 = 0.0;  ///< ||theta - Pi^nabla theta_h||_0
};

StepErrors error_step(const Discretization& disc, const SolutionState& state, const ExactFields& exact);

/// Time-discrete L2(H) sums and the last-step snapshot.
class ErrorAccumulator {
 public:
  void add(double dt, const StepErrors& e);

  [[nodiscard]] double psi_L2H2() const;
  [[nodiscard]] double theta_L2H1() const;
  [[nodiscard]] double psi_LinfH1() const noexcept { return last_.psi_H1; }
  [[nodiscard]] double theta_LinfL2() const noexcept { return last_.theta_L2; }
  [[nodiscard]] int steps() const noexcept { return steps_; }

 private:
  double sum_psi_ = 0.0;
  double sum_theta_ = 0.0;
  StepErrors last_;
  int steps_ = 0;
};

/// rate_i = log(E_i / E_{i+1}) / log(h_i / h_{i+1}); empty where undefined.
std::vector<std::optional<double>> convergence_rates(const std::vector<std::pair<double, double>>& h_and_error);

/// Locates the cells containing a point (several when it lies on shared edges).
class PointLocator {
 public:
  explicit PointLocator(const PolygonalMesh& mesh);
  [[nodiscard]] std::vector<int> find(const Point& p) const;

 private:
  const PolygonalMesh& mesh_;
  Point lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

enum class Midline {
  horizontal,  ///< y = 0.5, parameter s = x
  vertical,    ///< x = 0.5, parameter s = y
};
enum class VelocityComponent { u1, u2 };

struct Profile {
  std::vector<double> s;
  std::vector<double> value;
  double max_abs = 0.0;
  double argmax = 0.0;
};

/// Samples u = curl psi = (dpsi/dy, -dpsi/dx) of Pi^{k-1} grad psi_h along a
/// midline of the unit square; values on shared edges are averaged.
Profile velocity_profile(const Discretization& disc, const SolutionState& state, Midline line,
                         VelocityComponent component, int samples = 1000);

/// Local Nusselt number -d(Pi^nabla theta_h)/dx along the left or right wall,
/// parameterized by y.
Profile nusselt_local(const Discretization& disc, const SolutionState& state, Wall wall, int samples = 1000);

}  // namespace vemb
