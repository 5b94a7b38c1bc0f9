#pragma once

#include <array>
#include <functional>

#include "vemb/analysis.hpp"
#include "vemb/solver.hpp"

namespace vemb {

/// A stream function psi(x, y, t) = T(t) X(x) Y(y) with velocity u = curl psi,
/// temperature theta = u1 + u2 and a given pressure gradient. The loads are
/// obtained from the strong equations
///   du/dt - nu Lap u + (u . grad) u + grad p - g theta = f_psi,
///   dtheta/dt - kappa Lap theta + u . grad theta = f_theta.
struct SeparableSolution {
  std::function<double(double)> T, dT;
  std::array<std::function<double(double)>, 4> X;  ///< X, X', X'', X'''
  std::array<std::function<double(double)>, 4> Y;
  std::function<Point(const Point&, double)> grad_p;
  Point g = Point(0.0, -1.0);

  [[nodiscard]] double psi(const Point& x, double t) const;
  [[nodiscard]] Point psi_grad(const Point& x, double t) const;
  [[nodiscard]] std::array<double, 3> psi_hessian(const Point& x, double t) const;
  [[nodiscard]] Point velocity(const Point& x, double t) const;
  [[nodiscard]] double theta(const Point& x, double t) const;
  [[nodiscard]] Point theta_grad(const Point& x, double t) const;

  [[nodiscard]] Point f_psi(const Point& x, double t, double nu) const;
  [[nodiscard]] double f_theta(const Point& x, double t, double kappa) const;

  [[nodiscard]] ExactFields at(double t) const;
  /// Loads, gravity and Dirichlet data for the given diffusion coefficients.
  [[nodiscard]] Problem problem(double nu, double kappa) const;
  [[nodiscard]] InitialData initial() const;
};

/// psi = (e^{10(t-1)} - e^{-10}) x^2 (1-x)^2 y^2 (1-y)^2.
SeparableSolution accuracy_solution();
/// psi = cos(t) sin(pi x) cos(pi y) / pi.
SeparableSolution small_viscosity_solution();
/// The accuracy solution with its time factor frozen at t = 1.
SeparableSolution stationary_solution();

}  // namespace vemb
