#include "vemb/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vemb/error.hpp"

namespace vemb {

StepErrors error_step(const Discretization& disc, const SolutionState& state, const ExactFields& exact) {
  double psi2 = 0.0, psi1 = 0.0, th1 = 0.0, th0 = 0.0;
  for (int c = 0; c < disc.mesh().n_cells(); ++c) {
    const auto& se = disc.stream(c);
    const auto& te = disc.temp(c);
    const auto& cell = se.cell();
    const int k = se.k();
    const int l = te.ell();
    const Eigen::VectorXd ps = se.projectors().PiD * disc.gather_stream(c, state.psi);
    const Eigen::VectorXd pt = te.projectors().PiNabla * disc.gather_temp(c, state.theta);
    const ScaledMonomialBasis bs = cell.basis(k);
    const ScaledMonomialBasis bt = cell.basis(l);
    const auto& rule = cell.volume_rule(2 * k + 4);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point& x = rule.points[q];
      const double w = rule.weights[q];
      const Eigen::Vector3d H = bs.hessians(x) * ps;
      const Eigen::Vector2d G = bs.gradients(x) * ps;
      const auto He = exact.psi_hessian(x);
      const double exx = He[0] - H(0), exy = He[1] - H(1), eyy = He[2] - H(2);
      psi2 += w * (exx * exx + 2.0 * exy * exy + eyy * eyy);
      psi1 += w * (exact.psi_grad(x) - G).squaredNorm();
      const Eigen::Vector2d Gt = bt.gradients(x) * pt;
      th1 += w * (exact.theta_grad(x) - Gt).squaredNorm();
      const double et = exact.theta(x) - bt.values(x).dot(pt);
      th0 += w * et * et;
    }
  }
  return {std::sqrt(psi2), std::sqrt(psi1), std::sqrt(th1), std::sqrt(th0)};
}

void ErrorAccumulator::add(double dt, const StepErrors& e) {
  sum_psi_ += dt * e.psi_H2 * e.psi_H2;
  sum_theta_ += dt * e.theta_H1 * e.theta_H1;
  last_ = e;
  ++steps_;
}

double ErrorAccumulator::psi_L2H2() const { return std::sqrt(sum_psi_); }
double ErrorAccumulator::theta_L2H1() const { return std::sqrt(sum_theta_); }

std::vector<std::optional<double>> convergence_rates(const std::vector<std::pair<double, double>>& he) {
  if (he.size() < 2) throw Error(ErrorCategory::domain, "convergence rates need at least two levels");
  std::vector<std::optional<double>> r;
  for (std::size_t i = 0; i + 1 < he.size(); ++i) {
    const auto [h0, e0] = he[i];
    const auto [h1, e1] = he[i + 1];
    if (e0 > 0 && e1 > 0 && h0 > 0 && h1 > 0 && h0 != h1) {
      r.emplace_back(std::log(e0 / e1) / std::log(h0 / h1));
    } else {
      r.emplace_back(std::nullopt);
    }
  }
  return r;
}

PointLocator::PointLocator(const PolygonalMesh& mesh) : mesh_(mesh) {
  lo_ = hi_ = mesh.vertex(0);
  for (const auto& p : mesh.vertices()) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.n_cells()))));
  nx_ = ny_ = side;
  buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  const Point span = (hi_ - lo_).cwiseMax(Point::Constant(1e-300));
  auto clampi = [](double v, int n) { return std::clamp(static_cast<int>(std::floor(v)), 0, n - 1); };
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Point a = mesh.vertex(mesh.cell(c)[0]);
    Point b = a;
    for (int v : mesh.cell(c)) {
      a = a.cwiseMin(mesh.vertex(v));
      b = b.cwiseMax(mesh.vertex(v));
    }
    const double eps = 1e-9 * span.maxCoeff();
    const int i0 = clampi((a.x() - eps - lo_.x()) / span.x() * nx_, nx_);
    const int i1 = clampi((b.x() + eps - lo_.x()) / span.x() * nx_, nx_);
    const int j0 = clampi((a.y() - eps - lo_.y()) / span.y() * ny_, ny_);
    const int j1 = clampi((b.y() + eps - lo_.y()) / span.y() * ny_, ny_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(c);
  }
}

std::vector<int> PointLocator::find(const Point& p) const {
  std::vector<int> out;
  const Point span = (hi_ - lo_).cwiseMax(Point::Constant(1e-300));
  const double tol = 1e-10 * span.maxCoeff();
  if ((p.array() < lo_.array() - tol).any() || (p.array() > hi_.array() + tol).any()) return out;
  const int i = std::clamp(static_cast<int>(std::floor((p.x() - lo_.x()) / span.x() * nx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y() - lo_.y()) / span.y() * ny_)), 0, ny_ - 1);
  for (int c : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
    const auto poly = mesh_.cell_points(c);
    if (point_in_polygon(poly, p, tol)) out.push_back(c);
  }
  return out;
}

namespace {

template <class F>
Profile sample_profile(const PolygonalMesh& mesh, int samples, const std::function<Point(double)>& where, F&& eval) {
  if (samples < 2) throw Error(ErrorCategory::domain, "a profile needs at least two samples");
  const PointLocator loc(mesh);
  Profile p;
  p.s.resize(samples);
  p.value.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const double s = static_cast<double>(i) / (samples - 1);
    const Point x = where(s);
    const auto cells = loc.find(x);
    if (cells.empty()) throw Error(ErrorCategory::domain, fmt::format("sample ({}, {}) lies outside the mesh", x.x(), x.y()));
    double v = 0.0;
    for (int c : cells) v += eval(c, x);
    v /= static_cast<double>(cells.size());
    p.s[i] = s;
    p.value[i] = v;
    if (std::abs(v) > p.max_abs) {
      p.max_abs = std::abs(v);
      p.argmax = s;
    }
  }
  return p;
}

}  // namespace

Profile velocity_profile(const Discretization& disc, const SolutionState& state, Midline line,
                         VelocityComponent component, int samples) {
  auto where = [line](double s) -> Point { return line == Midline::horizontal ? Point(s, 0.5) : Point(0.5, s); };
  return sample_profile(disc.mesh(), samples, where, [&](int c, const Point& x) {
    const auto& se = disc.stream(c);
    const auto& pr = se.projectors();
    const Eigen::VectorXd d = disc.gather_stream(c, state.psi);
    const Eigen::VectorXd m = se.cell().basis(se.k() - 1).values(x);
    return component == VelocityComponent::u1 ? m.dot(pr.PiGradY * d) : -m.dot(pr.PiGradX * d);
  });
}

Profile nusselt_local(const Discretization& disc, const SolutionState& state, Wall wall, int samples) {
  if (wall != Wall::left && wall != Wall::right) throw Error(ErrorCategory::domain, "Nusselt profiles are taken on the left or right wall");
  bool found = false;
  for (int e = 0; e < disc.mesh().n_edges() && !found; ++e) found = disc.mesh().boundary_wall(e) == wall;
  if (!found) throw Error(ErrorCategory::domain, fmt::format("mesh has no edges on the {} wall", to_string(wall)));
  const double x0 = wall == Wall::left ? 0.0 : 1.0;
  auto where = [x0](double s) { return Point(x0, s); };
  return sample_profile(disc.mesh(), samples, where, [&](int c, const Point& x) {
    const auto& te = disc.temp(c);
    const Eigen::VectorXd coef = te.projectors().PiNabla * disc.gather_temp(c, state.theta);
    return -(te.cell().basis(te.ell()).gradients(x).row(0).dot(coef));
  });
}

}  // namespace vemb
