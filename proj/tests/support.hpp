#pragma once

#include <random>
#include <vector>

#include <Eigen/Cholesky>

#include "vemb/cell.hpp"
#include "vemb/mesh.hpp"
#include "vemb/polybasis.hpp"
#include "vemb/stream_element.hpp"
#include "vemb/temp_element.hpp"

namespace vemb::testing {

inline constexpr MeshFamily kAllFamilies[] = {MeshFamily::quad_distorted, MeshFamily::triangular, MeshFamily::voronoi,
                                              MeshFamily::concave_rhombic, MeshFamily::quad_uniform};

/// Five cells spread through the mesh.
inline std::vector<int> sample_cells(const PolygonalMesh& m) {
  std::vector<int> out;
  for (int i = 0; i < 5; ++i) out.push_back((i * (m.n_cells() - 1)) / 4);
  return out;
}

inline Eigen::VectorXd random_coeffs(std::mt19937& rng, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd c(poly_dim(degree));
  for (int i = 0; i < c.size(); ++i) c(i) = u(rng);
  return c;
}

inline Eigen::VectorXd pad(const Eigen::VectorXd& c, int degree) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(poly_dim(degree));
  out.head(std::min<int>(c.size(), out.size())) = c.head(std::min<int>(c.size(), out.size()));
  return out;
}

/// Polynomial given by coefficients in the scaled basis of a cell.
struct CellPolynomial {
  ScaledMonomialBasis basis;
  Eigen::VectorXd c;

  [[nodiscard]] double value(const Point& x) const { return basis.values(x).dot(c); }
  [[nodiscard]] Point grad(const Point& x) const { return basis.gradients(x) * c; }
  [[nodiscard]] StreamSample sample(const Point& x) const { return {value(x), grad(x)}; }
};

/// L2 projection onto P_degree by quadrature and the Gram matrix.
inline Eigen::VectorXd l2_project(const ElementCell& cell, const CellPolynomial& q, int degree) {
  if (degree < 0) return {};
  const ScaledMonomialBasis b = cell.basis(degree);
  const QuadratureRule& rule = cell.volume_rule(degree + q.basis.degree());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b.size());
  for (std::size_t i = 0; i < rule.size(); ++i) rhs += rule.weights[i] * q.value(rule.points[i]) * b.values(rule.points[i]);
  return cell.gram(degree).ldlt().solve(rhs);
}

inline double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want, double scale) {
  return (got - want).norm() / std::max(scale, 1e-300);
}

}  // namespace vemb::testing
