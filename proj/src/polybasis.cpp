#include "vemb/polybasis.hpp"

#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "vemb/error.hpp"

namespace vemb {

std::vector<std::pair<int, int>> monomial_exponents(int n) {
  std::vector<std::pair<int, int>> e;
  e.reserve(static_cast<std::size_t>(poly_dim(n)));
  for (int d = 0; d <= n; ++d)
    for (int b = 0; b <= d; ++b) e.emplace_back(d - b, b);
  return e;
}

ScaledMonomialBasis::ScaledMonomialBasis(Point center, double h, int degree)
    : center_(std::move(center)), h_(h), degree_(degree) {}

namespace {

std::vector<double> powers(double t, int n) {
  std::vector<double> p(static_cast<std::size_t>(std::max(n, 0) + 1), 1.0);
  for (int i = 1; i <= n; ++i) p[i] = p[i - 1] * t;
  return p;
}

}  // namespace

Eigen::VectorXd ScaledMonomialBasis::values(const Point& x) const {
  const auto px = powers((x.x() - center_.x()) / h_, degree_);
  const auto py = powers((x.y() - center_.y()) / h_, degree_);
  Eigen::VectorXd v(size());
  int i = 0;
  for (int d = 0; d <= degree_; ++d)
    for (int b = 0; b <= d; ++b) v(i++) = px[d - b] * py[b];
  return v;
}

Eigen::MatrixXd ScaledMonomialBasis::gradients(const Point& x) const {
  const auto px = powers((x.x() - center_.x()) / h_, degree_);
  const auto py = powers((x.y() - center_.y()) / h_, degree_);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, size());
  int i = 0;
  for (int d = 0; d <= degree_; ++d) {
    for (int b = 0; b <= d; ++b, ++i) {
      const int a = d - b;
      if (a > 0) g(0, i) = a * px[a - 1] * py[b] / h_;
      if (b > 0) g(1, i) = b * px[a] * py[b - 1] / h_;
    }
  }
  return g;
}

Eigen::MatrixXd ScaledMonomialBasis::hessians(const Point& x) const {
  const auto px = powers((x.x() - center_.x()) / h_, degree_);
  const auto py = powers((x.y() - center_.y()) / h_, degree_);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, size());
  const double h2 = h_ * h_;
  int i = 0;
  for (int d = 0; d <= degree_; ++d) {
    for (int b = 0; b <= d; ++b, ++i) {
      const int a = d - b;
      if (a > 1) H(0, i) = a * (a - 1) * px[a - 2] * py[b] / h2;
      if (a > 0 && b > 0) H(1, i) = a * b * px[a - 1] * py[b - 1] / h2;
      if (b > 1) H(2, i) = b * (b - 1) * px[a] * py[b - 2] / h2;
    }
  }
  return H;
}

double ScaledMonomialBasis::evaluate(const Eigen::VectorXd& coeffs, const Point& x) const {
  return values(x).head(coeffs.size()).dot(coeffs);
}

DerivativeTables monomial_derivatives(const ScaledMonomialBasis& basis) {
  const int n = basis.degree();
  const int N = basis.size();
  const double h = basis.h();
  DerivativeTables t;
  t.dx = Eigen::MatrixXd::Zero(N, N);
  t.dy = Eigen::MatrixXd::Zero(N, N);
  int i = 0;
  for (int d = 0; d <= n; ++d) {
    for (int b = 0; b <= d; ++b, ++i) {
      const int a = d - b;
      if (a > 0) t.dx(monomial_index(a - 1, b), i) = a / h;
      if (b > 0) t.dy(monomial_index(a, b - 1), i) = b / h;
    }
  }
  t.dxx = t.dx * t.dx;
  t.dxy = t.dx * t.dy;
  t.dyy = t.dy * t.dy;
  t.lap = t.dxx + t.dyy;
  t.bilap = t.lap * t.lap;
  return t;
}

Eigen::VectorXd multiply_polynomials(const Eigen::VectorXd& p, int deg_p, const Eigen::VectorXd& q, int deg_q) {
  const auto ep = monomial_exponents(deg_p);
  const auto eq = monomial_exponents(deg_q);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(poly_dim(deg_p + deg_q));
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    for (int j = 0; j < q.size(); ++j) {
      r(monomial_index(ep[i].first + eq[j].first, ep[i].second + eq[j].second)) += p(i) * q(j);
    }
  }
  return r;
}

namespace {

// Golub-Welsch for the Jacobi weight (1-x)^alpha (1+x)^beta on [-1, 1]
std::pair<std::vector<double>, std::vector<double>> gauss_jacobi(int n, double alpha, double beta) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    J(k, k) = k == 0 ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double num = 4.0 * m * (m + alpha) * (m + beta) * (m + ab);
      const double den = (2.0 * m + ab - 1.0) * (2.0 * m + ab) * (2.0 * m + ab) * (2.0 * m + ab + 1.0);
      J(k, k + 1) = J(k + 1, k) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
  std::vector<double> x(n);
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    const double v = es.eigenvectors()(0, k);
    w[k] = mu0 * v * v;
  }
  return {x, w};
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int npts) {
  thread_local std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(npts);
  if (it != cache.end()) return it->second;
  auto [x, w] = gauss_jacobi(npts, 0.0, 0.0);
  for (int k = 0; k < npts; ++k) {
    x[k] = 0.5 * (1.0 + x[k]);
    w[k] *= 0.5;
  }
  return cache.emplace(npts, std::make_pair(x, w)).first->second;
}

QuadratureRule triangle_quadrature(int order) {
  thread_local std::map<int, QuadratureRule> cache;
  const int n = std::max(1, (order + 2) / 2);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto [xu, wu] = gauss_jacobi(n, 1.0, 0.0);
  const auto [xv, wv] = gauss_legendre(n);
  QuadratureRule r;
  for (int i = 0; i < n; ++i) {
    const double u = 0.5 * (1.0 + xu[i]);
    const double wi = 0.25 * wu[i];
    for (int j = 0; j < n; ++j) {
      r.points.emplace_back(u, xv[j] * (1.0 - u));
      r.weights.push_back(wi * wv[j]);
    }
  }
  return cache.emplace(n, std::move(r)).first->second;
}

QuadratureRule polygon_quadrature(std::span<const Point> polygon, int order) {
  const std::size_t m = polygon.size();
  const double area = signed_area(polygon);
  auto fan_ok = [&](const Point& c) {
    for (std::size_t i = 0; i < m; ++i) {
      const Point a = polygon[i] - c;
      const Point b = polygon[(i + 1) % m] - c;
      if (a.x() * b.y() - a.y() * b.x() <= 1e-14 * std::abs(area)) return false;
    }
    return true;
  };
  Point c = polygon_centroid(polygon);
  if (!fan_ok(c)) {
    const auto ball = kernel_chebyshev_ball(polygon);
    c = ball.center;
    if (ball.radius <= 0.0 || !fan_ok(c)) {
      throw Error(ErrorCategory::geometry, "polygon is not star-shaped; cannot build quadrature");
    }
  }
  const QuadratureRule& ref = triangle_quadrature(order);
  QuadratureRule r;
  r.points.reserve(m * ref.size());
  r.weights.reserve(m * ref.size());
  for (std::size_t i = 0; i < m; ++i) {
    const Point e1 = polygon[i] - c;
    const Point e2 = polygon[(i + 1) % m] - c;
    const double jac = e1.x() * e2.y() - e1.y() * e2.x();
    for (std::size_t q = 0; q < ref.size(); ++q) {
      r.points.push_back(c + ref.points[q].x() * e1 + ref.points[q].y() * e2);
      r.weights.push_back(ref.weights[q] * jac);
    }
  }
  return r;
}

EdgeRule edge_quadrature(const Point& a, const Point& b, int npts) {
  const auto [x, w] = gauss_legendre(npts);
  const double len = (b - a).norm();
  EdgeRule r;
  for (int i = 0; i < npts; ++i) {
    r.params.push_back(x[i]);
    r.points.push_back(a + x[i] * (b - a));
    r.weights.push_back(w[i] * len);
  }
  return r;
}

}  // namespace vemb
