#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vemb/geometry.hpp"

namespace vemb {

/// Number of bivariate monomials of total degree <= n (0 for n < 0).
constexpr int poly_dim(int n) noexcept { return n < 0 ? 0 : (n + 1) * (n + 2) / 2; }

/// Position of x^a y^b in graded lexicographic order:
/// 1, x, y, x^2, xy, y^2, x^3, ...
constexpr int monomial_index(int a, int b) noexcept { return poly_dim(a + b - 1) + b; }

/// Exponent pairs (a, b) of all monomials up to degree n in graded order.
std::vector<std::pair<int, int>> monomial_exponents(int n);

/// m_ab(x) = ((x - x_E)/h_E)^a ((y - y_E)/h_E)^b for a + b <= degree.
class ScaledMonomialBasis {
 public:
  ScaledMonomialBasis(Point center, double h, int degree);

  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] int size() const noexcept { return poly_dim(degree_); }
  [[nodiscard]] const Point& center() const noexcept { return center_; }
  [[nodiscard]] double h() const noexcept { return h_; }

  [[nodiscard]] Eigen::VectorXd values(const Point& x) const;
  /// 2 x size: rows d/dx, d/dy.
  [[nodiscard]] Eigen::MatrixXd gradients(const Point& x) const;
  /// 3 x size: rows d2/dx2, d2/dxdy, d2/dy2.
  [[nodiscard]] Eigen::MatrixXd hessians(const Point& x) const;

  [[nodiscard]] double evaluate(const Eigen::VectorXd& coeffs, const Point& x) const;

 private:
  Point center_;
  double h_;
  int degree_;
};

/// Exact differentiation of coefficient vectors in a scaled monomial basis.
/// Every matrix is size x size and maps coefficients of p to those of the
/// derivative in the same basis (higher-degree rows stay zero).
struct DerivativeTables {
  Eigen::MatrixXd dx, dy;
  Eigen::MatrixXd dxx, dxy, dyy;
  Eigen::MatrixXd lap, bilap;
};

DerivativeTables monomial_derivatives(const ScaledMonomialBasis& basis);

/// Monomial coefficients of the product of two polynomials (degrees add).
Eigen::VectorXd multiply_polynomials(const Eigen::VectorXd& p, int deg_p, const Eigen::VectorXd& q, int deg_q);

struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int npts);

/// Rule on the reference triangle (0,0), (1,0), (0,1), exact to total degree `order`.
QuadratureRule triangle_quadrature(int order);

/// Rule on an arbitrary polygon exact to total degree `order`, built by fanning
/// triangles from the centroid (or from the kernel centre if the centroid does
/// not see every edge).
QuadratureRule polygon_quadrature(std::span<const Point> polygon, int order);

struct EdgeRule {
  std::vector<Point> points;
  std::vector<double> weights;  ///< sum to the edge length
  std::vector<double> params;   ///< position along the edge in [0, 1]

  [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }
};

EdgeRule edge_quadrature(const Point& a, const Point& b, int npts);

}  // namespace vemb
