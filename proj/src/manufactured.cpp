#include "vemb/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace vemb {

namespace {

// Partial derivative d^{a+b} psi / dx^a dy^b at time t.
double d(const SeparableSolution& s, int a, int b, const Point& x, double t) {
  return s.T(t) * s.X[a](x.x()) * s.Y[b](x.y());
}
double dt(const SeparableSolution& s, int a, int b, const Point& x, double t) {
  return s.dT(t) * s.X[a](x.x()) * s.Y[b](x.y());
}

}  // namespace

double SeparableSolution::psi(const Point& x, double t) const { return d(*this, 0, 0, x, t); }

Point SeparableSolution::psi_grad(const Point& x, double t) const {
  return {d(*this, 1, 0, x, t), d(*this, 0, 1, x, t)};
}

std::array<double, 3> SeparableSolution::psi_hessian(const Point& x, double t) const {
  return {d(*this, 2, 0, x, t), d(*this, 1, 1, x, t), d(*this, 0, 2, x, t)};
}

Point SeparableSolution::velocity(const Point& x, double t) const {
  return {d(*this, 0, 1, x, t), -d(*this, 1, 0, x, t)};
}

double SeparableSolution::theta(const Point& x, double t) const { return d(*this, 0, 1, x, t) - d(*this, 1, 0, x, t); }

Point SeparableSolution::theta_grad(const Point& x, double t) const {
  return {d(*this, 1, 1, x, t) - d(*this, 2, 0, x, t), d(*this, 0, 2, x, t) - d(*this, 1, 1, x, t)};
}

Point SeparableSolution::f_psi(const Point& x, double t, double nu) const {
  // u1 = psi_y, u2 = -psi_x
  const double u1 = d(*this, 0, 1, x, t);
  const double u2 = -d(*this, 1, 0, x, t);
  const double u1x = d(*this, 1, 1, x, t);
  const double u1y = d(*this, 0, 2, x, t);
  const double u2x = -d(*this, 2, 0, x, t);
  const double u2y = -d(*this, 1, 1, x, t);
  const double lap_u1 = d(*this, 2, 1, x, t) + d(*this, 0, 3, x, t);
  const double lap_u2 = -(d(*this, 3, 0, x, t) + d(*this, 1, 2, x, t));
  const Point ut(dt(*this, 0, 1, x, t), -dt(*this, 1, 0, x, t));
  const Point conv(u1 * u1x + u2 * u1y, u1 * u2x + u2 * u2y);
  return ut - nu * Point(lap_u1, lap_u2) + conv + grad_p(x, t) - g * theta(x, t);
}

double SeparableSolution::f_theta(const Point& x, double t, double kappa) const {
  const double th_t = dt(*this, 0, 1, x, t) - dt(*this, 1, 0, x, t);
  const double lap = d(*this, 2, 1, x, t) + d(*this, 0, 3, x, t) - d(*this, 3, 0, x, t) - d(*this, 1, 2, x, t);
  return th_t - kappa * lap + velocity(x, t).dot(theta_grad(x, t));
}

ExactFields SeparableSolution::at(double t) const {
  const SeparableSolution self = *this;
  ExactFields e;
  e.psi = [self, t](const Point& x) { return self.psi(x, t); };
  e.psi_grad = [self, t](const Point& x) { return self.psi_grad(x, t); };
  e.psi_hessian = [self, t](const Point& x) { return self.psi_hessian(x, t); };
  e.theta = [self, t](const Point& x) { return self.theta(x, t); };
  e.theta_grad = [self, t](const Point& x) { return self.theta_grad(x, t); };
  return e;
}

Problem SeparableSolution::problem(double nu, double kappa) const {
  Problem p;
  p.nu = nu;
  p.kappa = kappa;
  const Point gv = g;
  p.g = [gv](const Point&, double) { return gv; };
  const SeparableSolution self = *this;
  p.f_psi = [self, nu](const Point& x, double t) { return self.f_psi(x, t, nu); };
  p.f_theta = [self, kappa](const Point& x, double t) { return self.f_theta(x, t, kappa); };
  p.psi_boundary = [self](const Point& x, double t) { return StreamSample{self.psi(x, t), self.psi_grad(x, t)}; };
  p.theta_boundary = [self](const Point& x, double t) { return self.theta(x, t); };
  p.bc = BoundarySpec::all_dirichlet();
  return p;
}

InitialData SeparableSolution::initial() const {
  const SeparableSolution self = *this;
  InitialData d0;
  d0.psi0 = [self](const Point& x) { return StreamSample{self.psi(x, 0.0), self.psi_grad(x, 0.0)}; };
  d0.psi0_hessian = [self](const Point& x) { return self.psi_hessian(x, 0.0); };
  d0.theta0 = [self](const Point& x) { return self.theta(x, 0.0); };
  d0.theta0_grad = [self](const Point& x) { return self.theta_grad(x, 0.0); };
  return d0;
}

SeparableSolution accuracy_solution() {
  SeparableSolution s;
  s.T = [](double t) { return std::exp(10.0 * (t - 1.0)) - std::exp(-10.0); };
  s.dT = [](double t) { return 10.0 * std::exp(10.0 * (t - 1.0)); };
  // P(z) = z^2 (1-z)^2 = z^2 - 2 z^3 + z^4
  const std::array<std::function<double(double)>, 4> P{
      [](double z) { return z * z * (1 - z) * (1 - z); },
      [](double z) { return 2 * z - 6 * z * z + 4 * z * z * z; },
      [](double z) { return 2 - 12 * z + 12 * z * z; },
      [](double z) { return -12 + 24 * z; },
  };
  s.X = P;
  s.Y = P;
  s.grad_p = [T = s.T](const Point& x, double t) -> Point {
    return Point(std::cos(x.x()) * std::cos(x.y()), -std::sin(x.x()) * std::sin(x.y())) * T(t);
  };
  return s;
}

SeparableSolution small_viscosity_solution() {
  using std::numbers::pi;
  SeparableSolution s;
  s.T = [](double t) { return std::cos(t) / pi; };
  s.dT = [](double t) { return -std::sin(t) / pi; };
  s.X = {
      [](double z) { return std::sin(pi * z); },
      [](double z) { return pi * std::cos(pi * z); },
      [](double z) { return -pi * pi * std::sin(pi * z); },
      [](double z) { return -pi * pi * pi * std::cos(pi * z); },
  };
  s.Y = {
      [](double z) { return std::cos(pi * z); },
      [](double z) { return -pi * std::sin(pi * z); },
      [](double z) { return -pi * pi * std::cos(pi * z); },
      [](double z) { return pi * pi * pi * std::sin(pi * z); },
  };
  s.grad_p = [](const Point& x, double t) -> Point {
    return Point(pi * std::cos(pi * x.x()), -pi * std::sin(pi * x.y())) * std::cos(t);
  };
  return s;
}

SeparableSolution stationary_solution() {
  SeparableSolution s = accuracy_solution();
  const double T1 = s.T(1.0);
  s.T = [T1](double) { return T1; };
  s.dT = [](double) { return 0.0; };
  auto gp = s.grad_p;
  s.grad_p = [gp](const Point& x, double) { return gp(x, 1.0); };
  return s;
}

}  // namespace vemb
