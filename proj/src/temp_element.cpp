#include "vemb/temp_element.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "vemb/error.hpp"
#include "vemb/stream_element.hpp"

namespace vemb {

namespace {

double xi_moment(int q) { return q % 2 != 0 ? 0.0 : 2.0 * std::pow(0.5, q + 1) / (q + 1); }

Eigen::RowVectorXd xi_powers(double xi, int n) {
  Eigen::RowVectorXd p(n + 1);
  p(0) = 1.0;
  for (int i = 1; i <= n; ++i) p(i) = p(i - 1) * xi;
  return p;
}

}  // namespace

TempLayout::TempLayout(int ell_, int n_vertices_) : ell(ell_), n_vertices(n_vertices_) {
  if (ell < 1) throw Error(ErrorCategory::config, fmt::format("temperature degree must be >= 1, got {}", ell));
}

std::vector<Eigen::MatrixXd> temp_traces(const ElementCell& cell, const TempLayout& layout) {
  const int nv = cell.n_vertices();
  const int l = layout.ell;
  std::vector<Eigen::MatrixXd> out;
  for (int j = 0; j < nv; ++j) {
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(l + 1, l + 1);
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(l + 1, layout.size());
    V.row(0) = xi_powers(-0.5, l);
    V.row(1) = xi_powers(0.5, l);
    R(0, layout.value(j)) = 1.0;
    R(1, layout.value((j + 1) % nv)) = 1.0;
    const double sigma = cell.edge_sign(j);
    for (int m = 0; m < layout.per_edge(); ++m) {
      for (int p = 0; p <= l; ++p) V(2 + m, p) = xi_moment(m + p);
      R(2 + m, layout.edge_moment(j, m)) = std::pow(sigma, m);
    }
    out.push_back(V.partialPivLu().solve(R));
  }
  return out;
}

Eigen::VectorXd interpolate_temp(const ElementCell& cell, const TempLayout& layout, const ScalarFunction& f) {
  const int nv = cell.n_vertices();
  const int l = layout.ell;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(layout.size());
  for (int i = 0; i < nv; ++i) d(layout.value(i)) = f(cell.vertex(i));
  if (layout.per_edge() > 0) {
    const LineRule lr = line_rule(l + 4);
    for (int j = 0; j < nv; ++j) {
      const double sigma = cell.edge_sign(j);
      for (std::size_t q = 0; q < lr.xi.size(); ++q) {
        const double v = f(cell.edge_point(j, lr.xi[q]));
        for (int m = 0; m < layout.per_edge(); ++m) {
          d(layout.edge_moment(j, m)) += std::pow(sigma, m) * lr.w[q] * std::pow(lr.xi[q], m) * v;
        }
      }
    }
  }
  if (layout.n_interior() > 0) {
    const auto b = cell.basis(l - 2);
    const auto& rule = cell.volume_rule(2 * l + 4);
    const double scale = 1.0 / (cell.diameter() * cell.diameter());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd m = b.values(rule.points[q]);
      const double v = f(rule.points[q]);
      for (int a = 0; a < layout.n_interior(); ++a) d(layout.interior(a)) += scale * rule.weights[q] * m(a) * v;
    }
  }
  return d;
}

TempProjectors build_temp_projectors(const ElementCell& cell, const TempLayout& layout,
                                     const std::vector<Eigen::MatrixXd>& traces, Eigen::MatrixXd* moments_out) {
  const int l = layout.ell;
  const int N = poly_dim(l);
  const int N1 = poly_dim(l - 1);
  const int N2 = poly_dim(l - 2);
  const int nv = cell.n_vertices();
  const int nd = layout.size();
  const auto b = cell.basis(l);
  const auto tab = monomial_derivatives(b);
  const double h2 = cell.diameter() * cell.diameter();

  // moments of degree <= l-2 straight from the interior DOFs
  Eigen::MatrixXd low = Eigen::MatrixXd::Zero(N2, nd);
  for (int g = 0; g < N2; ++g) low(g, layout.interior(g)) = h2;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, nd);
  for (int i = 0; i < nv; ++i) {
    A.row(0) += b.values(cell.vertex(i)).transpose() / nv;
    B(0, layout.value(i)) = 1.0 / nv;
  }
  const auto& rule = cell.volume_rule(std::max(1, 2 * l - 2));
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::MatrixXd G = b.gradients(rule.points[q]);
    K.noalias() += rule.weights[q] * G.transpose() * G;
  }
  A.bottomRows(N - 1) = K.bottomRows(N - 1);
  if (N2 > 0) B.bottomRows(N - 1) = -tab.lap.block(0, 1, N2, N - 1).transpose() * low;

  Eigen::MatrixXd rx = Eigen::MatrixXd::Zero(N1, nd);
  Eigen::MatrixXd ry = Eigen::MatrixXd::Zero(N1, nd);
  const LineRule lr = line_rule(l + 2);
  for (int j = 0; j < nv; ++j) {
    const double L = cell.edge_length(j);
    const Point n = cell.edge_normal(j);
    for (std::size_t q = 0; q < lr.xi.size(); ++q) {
      const Point x = cell.edge_point(j, lr.xi[q]);
      const Eigen::RowVectorXd tr = xi_powers(lr.xi[q], l) * traces[j];
      const double w = L * lr.w[q];
      const Eigen::VectorXd m = b.values(x);
      const Eigen::MatrixXd G = b.gradients(x);
      const Eigen::RowVectorXd dn = n.x() * G.row(0) + n.y() * G.row(1);
      for (int a = 1; a < N; ++a) B.row(a) += w * dn(a) * tr;
      for (int a = 0; a < N1; ++a) {
        rx.row(a) += w * m(a) * n.x() * tr;
        ry.row(a) += w * m(a) * n.y() * tr;
      }
    }
  }

  TempProjectors p;
  p.PiNabla = solve_local(A, B, "temperature H1 projector");

  const Eigen::MatrixXd Gl = cell.gram(l);
  Eigen::MatrixXd mom(N, nd);
  mom.topRows(N2) = low;
  mom.bottomRows(N - N2) = Gl.bottomRows(N - N2) * p.PiNabla;
  if (moments_out != nullptr) *moments_out = mom;

  p.PiL2_l = solve_local(Gl, mom, "temperature L2 projector");
  p.PiL2_lm1 = solve_local(Gl.topLeftCorner(N1, N1), mom.topRows(N1), "temperature L2 projector");
  if (N2 > 0) {
    rx -= tab.dx.topLeftCorner(N2, N1).transpose() * low;
    ry -= tab.dy.topLeftCorner(N2, N1).transpose() * low;
  }
  p.PiGradX = solve_local(Gl.topLeftCorner(N1, N1), rx, "temperature gradient projector");
  p.PiGradY = solve_local(Gl.topLeftCorner(N1, N1), ry, "temperature gradient projector");
  return p;
}

TempElement::TempElement(ElementCell cell, int ell) : cell_(std::move(cell)), layout_(ell, cell_.n_vertices()) {
  traces_ = temp_traces(cell_, layout_);
  const int N = poly_dim(ell);
  const auto b = cell_.basis(ell);
  D_.resize(layout_.size(), N);
  for (int a = 0; a < N; ++a) {
    D_.col(a) = interpolate_temp(cell_, layout_, [&](const Point& x) { return b.values(x)(a); });
  }
  proj_ = build_temp_projectors(cell_, layout_, traces_, &moments_);
}

Eigen::VectorXd TempElement::interpolate(const ScalarFunction& f) const { return interpolate_temp(cell_, layout_, f); }

}  // namespace vemb
