#include "vemb/stream_element.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "vemb/error.hpp"

namespace vemb {

namespace {

// int_{-1/2}^{1/2} xi^q dxi
double xi_moment(int q) { return q % 2 != 0 ? 0.0 : 2.0 * std::pow(0.5, q + 1) / (q + 1); }

Eigen::RowVectorXd xi_powers(double xi, int n) {
  Eigen::RowVectorXd p(n + 1);
  p(0) = 1.0;
  for (int i = 1; i <= n; ++i) p(i) = p(i - 1) * xi;
  return p;
}

Eigen::RowVectorXd xi_dpowers(double xi, int n) {
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(n + 1);
  for (int i = 1; i <= n; ++i) p(i) = i * std::pow(xi, i - 1);
  return p;
}

}  // namespace

StreamLayout::StreamLayout(int k_, int n_vertices_) : k(k_), n_vertices(n_vertices_) {
  if (k < 2) throw Error(ErrorCategory::config, fmt::format("stream degree k must be >= 2, got {}", k));
}

Eigen::MatrixXd solve_local(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw Error(ErrorCategory::singular, fmt::format("{} system is singular (rcond {:.3e})", what, rc));
  Eigen::MatrixXd X = lu.solve(B);
  if (!X.allFinite()) throw Error(ErrorCategory::singular, fmt::format("{} system produced non-finite values", what));
  return X;
}

EdgeTrace edge_trace(const ElementCell& cell, const StreamLayout& layout, int j) {
  const int nv = cell.n_vertices();
  const int nd = layout.size();
  const int kh = layout.khat();
  const int k = layout.k;
  const int i0 = j;
  const int i1 = (j + 1) % nv;
  const double L = cell.edge_length(j);
  const Point t = cell.edge_tangent(j);
  const Point n = cell.edge_normal(j);
  const double sigma = cell.edge_sign(j);

  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(kh + 1, kh + 1);
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(kh + 1, nd);
  V.row(0) = xi_powers(-0.5, kh);
  V.row(1) = xi_powers(0.5, kh);
  V.row(2) = xi_dpowers(-0.5, kh);
  V.row(3) = xi_dpowers(0.5, kh);
  R(0, layout.value(i0)) = 1.0;
  R(1, layout.value(i1)) = 1.0;
  const double s0 = L / cell.vertex_scale(i0);
  const double s1 = L / cell.vertex_scale(i1);
  R(2, layout.grad(i0, 0)) = s0 * t.x();
  R(2, layout.grad(i0, 1)) = s0 * t.y();
  R(3, layout.grad(i1, 0)) = s1 * t.x();
  R(3, layout.grad(i1, 1)) = s1 * t.y();
  for (int m = 0; m < layout.n_trace_moments(); ++m) {
    for (int p = 0; p <= kh; ++p) V(4 + m, p) = xi_moment(m + p);
    R(4 + m, layout.trace_moment(j, m)) = std::pow(sigma, m);
  }

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, nd);
  W.row(0) = xi_powers(-0.5, k - 1);
  W.row(1) = xi_powers(0.5, k - 1);
  S(0, layout.grad(i0, 0)) = n.x() / cell.vertex_scale(i0);
  S(0, layout.grad(i0, 1)) = n.y() / cell.vertex_scale(i0);
  S(1, layout.grad(i1, 0)) = n.x() / cell.vertex_scale(i1);
  S(1, layout.grad(i1, 1)) = n.y() / cell.vertex_scale(i1);
  for (int m = 0; m < layout.n_normal_moments(); ++m) {
    for (int p = 0; p < k; ++p) W(2 + m, p) = xi_moment(m + p);
    S(2 + m, layout.normal_moment(j, m)) = std::pow(sigma, m + 1) / L;
  }

  EdgeTrace e;
  e.trace = V.partialPivLu().solve(R);
  e.normal = W.partialPivLu().solve(S);
  return e;
}

Eigen::VectorXd interpolate_stream(const ElementCell& cell, const StreamLayout& layout, const StreamFunction& f) {
  const int nv = cell.n_vertices();
  const int k = layout.k;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(layout.size());
  for (int i = 0; i < nv; ++i) {
    const StreamSample s = f(cell.vertex(i));
    d(layout.value(i)) = s.value;
    d(layout.grad(i, 0)) = cell.vertex_scale(i) * s.grad.x();
    d(layout.grad(i, 1)) = cell.vertex_scale(i) * s.grad.y();
  }
  if (layout.per_edge() > 0) {
    const LineRule lr = line_rule(k + 4);
    for (int j = 0; j < nv; ++j) {
      const double L = cell.edge_length(j);
      const Point n = cell.edge_normal(j);
      const double sigma = cell.edge_sign(j);
      for (std::size_t q = 0; q < lr.xi.size(); ++q) {
        const double xi = lr.xi[q];
        const StreamSample s = f(cell.edge_point(j, xi));
        for (int m = 0; m < layout.n_normal_moments(); ++m) {
          d(layout.normal_moment(j, m)) += std::pow(sigma, m + 1) * lr.w[q] * L * std::pow(xi, m) * n.dot(s.grad);
        }
        for (int m = 0; m < layout.n_trace_moments(); ++m) {
          d(layout.trace_moment(j, m)) += std::pow(sigma, m) * lr.w[q] * std::pow(xi, m) * s.value;
        }
      }
    }
  }
  if (layout.n_interior() > 0) {
    const auto b = cell.basis(k - 4);
    const auto& rule = cell.volume_rule(2 * k + 4);
    const double scale = 1.0 / (cell.diameter() * cell.diameter());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd m = b.values(rule.points[q]);
      const double v = f(rule.points[q]).value;
      for (int a = 0; a < layout.n_interior(); ++a) d(layout.interior(a)) += scale * rule.weights[q] * m(a) * v;
    }
  }
  return d;
}

namespace {

// Applies fn(x, L*w, trace_row, dtrace_row/L, normal_row, n, t) at edge Gauss points.
template <class Fn>
void for_edge_points(const ElementCell& cell, const std::vector<EdgeTrace>& traces, int npts, Fn&& fn) {
  const LineRule lr = line_rule(npts);
  for (int j = 0; j < cell.n_vertices(); ++j) {
    const EdgeTrace& e = traces[j];
    const int kh = static_cast<int>(e.trace.rows()) - 1;
    const int kn = static_cast<int>(e.normal.rows()) - 1;
    const double L = cell.edge_length(j);
    const Point n = cell.edge_normal(j);
    const Point t = cell.edge_tangent(j);
    for (std::size_t q = 0; q < lr.xi.size(); ++q) {
      const double xi = lr.xi[q];
      const Eigen::RowVectorXd tr = xi_powers(xi, kh) * e.trace;
      const Eigen::RowVectorXd dt = (xi_dpowers(xi, kh) * e.trace) / L;
      const Eigen::RowVectorXd nr = xi_powers(xi, kn) * e.normal;
      fn(cell.edge_point(j, xi), L * lr.w[q], tr, dt, nr, n, t);
    }
  }
}

}  // namespace

Eigen::MatrixXd build_pi_d(const ElementCell& cell, const StreamLayout& layout, const std::vector<EdgeTrace>& traces) {
  const int k = layout.k;
  const int N = poly_dim(k);
  const int nd = layout.size();
  const int nv = cell.n_vertices();
  const auto b = cell.basis(k);
  const auto tab = monomial_derivatives(b);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, nd);

  for (int i = 0; i < nv; ++i) {
    const Point& v = cell.vertex(i);
    A.row(0) += b.values(v).transpose() / nv;
    const Eigen::MatrixXd g = b.gradients(v);
    A.row(1) += g.row(0) / nv;
    A.row(2) += g.row(1) / nv;
    B(0, layout.value(i)) = 1.0 / nv;
    B(1, layout.grad(i, 0)) = 1.0 / (nv * cell.vertex_scale(i));
    B(2, layout.grad(i, 1)) = 1.0 / (nv * cell.vertex_scale(i));
  }

  const auto& rule = cell.volume_rule(std::max(1, 2 * k - 4));
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::MatrixXd H = b.hessians(rule.points[q]);
    K.noalias() += rule.weights[q] * (H.row(0).transpose() * H.row(0) + 2.0 * H.row(1).transpose() * H.row(1) +
                                      H.row(2).transpose() * H.row(2));
  }
  A.bottomRows(N - 3) = K.bottomRows(N - 3);

  for_edge_points(cell, traces, (k + layout.khat()) / 2 + 2,
                  [&](const Point& x, double w, const Eigen::RowVectorXd& tr, const Eigen::RowVectorXd& dt,
                      const Eigen::RowVectorXd& nr, const Point& n, const Point& t) {
                    const Eigen::MatrixXd H = b.hessians(x);
                    const Eigen::MatrixXd G = b.gradients(x);
                    const Eigen::RowVectorXd glap_n = (n.x() * G.row(0) + n.y() * G.row(1)) * tab.lap;
                    for (int a = 3; a < N; ++a) {
                      const double hxx = H(0, a), hxy = H(1, a), hyy = H(2, a);
                      const Point Hn(hxx * n.x() + hxy * n.y(), hxy * n.x() + hyy * n.y());
                      B.row(a) += w * (t.dot(Hn) * dt + n.dot(Hn) * nr - glap_n(a) * tr);
                    }
                  });

  const double h2 = cell.diameter() * cell.diameter();
  for (int a = 3; a < N; ++a) {
    for (int g = 0; g < layout.n_interior(); ++g) B(a, layout.interior(g)) += tab.bilap(g, a) * h2;
  }
  return solve_local(A, B, "energy projector");
}

Eigen::MatrixXd stream_moments(const ElementCell& cell, const StreamLayout& layout, const Eigen::MatrixXd& PiD) {
  const int k = layout.k;
  const int n2 = poly_dim(k - 2);
  const int n4 = poly_dim(k - 4);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n2, layout.size());
  const double h2 = cell.diameter() * cell.diameter();
  for (int g = 0; g < n4; ++g) M(g, layout.interior(g)) = h2;
  const Eigen::MatrixXd G = cell.gram(k);
  M.bottomRows(n2 - n4) = G.block(n4, 0, n2 - n4, poly_dim(k)) * PiD;
  return M;
}

Eigen::MatrixXd build_pi_c(const ElementCell& cell, const StreamLayout& layout, const std::vector<EdgeTrace>& traces,
                           const Eigen::MatrixXd& moments) {
  const int k = layout.k;
  const int N = poly_dim(k);
  const int nv = cell.n_vertices();
  const auto b = cell.basis(k);
  const auto tab = monomial_derivatives(b);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, layout.size());
  for (int i = 0; i < nv; ++i) {
    A.row(0) += b.values(cell.vertex(i)).transpose() / nv;
    B(0, layout.value(i)) = 1.0 / nv;
  }
  const auto& rule = cell.volume_rule(2 * k - 2);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::MatrixXd G = b.gradients(rule.points[q]);
    K.noalias() += rule.weights[q] * G.transpose() * G;
  }
  A.bottomRows(N - 1) = K.bottomRows(N - 1);
  const int n2 = poly_dim(k - 2);
  B.bottomRows(N - 1) = -tab.lap.block(0, 1, n2, N - 1).transpose() * moments;
  for_edge_points(cell, traces, (k + layout.khat()) / 2 + 1,
                  [&](const Point& x, double w, const Eigen::RowVectorXd& tr, const Eigen::RowVectorXd&,
                      const Eigen::RowVectorXd&, const Point& n, const Point&) {
                    const Eigen::MatrixXd G = b.gradients(x);
                    const Eigen::RowVectorXd dn = n.x() * G.row(0) + n.y() * G.row(1);
                    for (int a = 1; a < N; ++a) B.row(a) += w * dn(a) * tr;
                  });
  return solve_local(A, B, "H1 projector");
}

void build_l2_projections(const ElementCell& cell, const StreamLayout& layout, const std::vector<EdgeTrace>& traces,
                          const Eigen::MatrixXd& moments, StreamProjectors& out) {
  const int k = layout.k;
  const int nd = layout.size();
  const int n1 = poly_dim(k - 1);
  const int n2 = poly_dim(k - 2);
  const auto b = cell.basis(k);
  const auto tab = monomial_derivatives(b);
  const Eigen::MatrixXd G = cell.gram(k - 1);
  const Eigen::MatrixXd G2 = G.topLeftCorner(n2, n2);

  out.PiL2_km2 = solve_local(G2, moments, "L2 projector");

  Eigen::MatrixXd rl = tab.lap.topLeftCorner(n2, n2).transpose() * moments;
  Eigen::MatrixXd rx = -tab.dx.topLeftCorner(n2, n1).transpose() * moments;
  Eigen::MatrixXd ry = -tab.dy.topLeftCorner(n2, n1).transpose() * moments;
  for_edge_points(cell, traces, (k + layout.khat()) / 2 + 1,
                  [&](const Point& x, double w, const Eigen::RowVectorXd& tr, const Eigen::RowVectorXd&,
                      const Eigen::RowVectorXd& nr, const Point& n, const Point&) {
                    const Eigen::VectorXd m = b.values(x);
                    const Eigen::MatrixXd Gr = b.gradients(x);
                    const Eigen::RowVectorXd dn = n.x() * Gr.row(0) + n.y() * Gr.row(1);
                    for (int a = 0; a < n2; ++a) rl.row(a) += w * (m(a) * nr - dn(a) * tr);
                    for (int a = 0; a < n1; ++a) {
                      rx.row(a) += w * m(a) * n.x() * tr;
                      ry.row(a) += w * m(a) * n.y() * tr;
                    }
                  });
  (void)nd;
  out.PiLap = solve_local(G2, rl, "Laplacian projector");
  out.PiGradX = solve_local(G, rx, "gradient projector");
  out.PiGradY = solve_local(G, ry, "gradient projector");
  out.PiCurlX = out.PiGradY;
  out.PiCurlY = -out.PiGradX;
}

StreamElement::StreamElement(ElementCell cell, int k) : cell_(std::move(cell)), layout_(k, cell_.n_vertices()) {
  for (int j = 0; j < cell_.n_vertices(); ++j) traces_.push_back(edge_trace(cell_, layout_, j));
  const int N = poly_dim(k);
  const auto b = cell_.basis(k);
  D_.resize(layout_.size(), N);
  for (int a = 0; a < N; ++a) {
    D_.col(a) = interpolate_stream(cell_, layout_, [&](const Point& x) {
      return StreamSample{b.values(x)(a), b.gradients(x).col(a)};
    });
  }
  proj_.PiD = build_pi_d(cell_, layout_, traces_);
  moments_ = stream_moments(cell_, layout_, proj_.PiD);
  proj_.PiC = build_pi_c(cell_, layout_, traces_, moments_);
  build_l2_projections(cell_, layout_, traces_, moments_, proj_);
}

Eigen::VectorXd StreamElement::interpolate(const StreamFunction& f) const { return interpolate_stream(cell_, layout_, f); }

}  // namespace vemb
