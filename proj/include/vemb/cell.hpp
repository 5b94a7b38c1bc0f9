#pragma once

#include <map>
#include <memory>
#include <vector>

#include "vemb/geometry.hpp"
#include "vemb/mesh.hpp"
#include "vemb/polybasis.hpp"

namespace vemb {

/// Everything a local element needs to know about one polygon.
///
/// Local edge j runs counterclockwise from vertex j to vertex j+1. Its sign is
/// -1 when the global edge orientation (lower to higher vertex id) is opposite,
/// which flips the parity of edge moments shared with the neighbour.
class ElementCell {
 public:
  /// A free-standing polygon: h_v = h_E and every edge keeps its local orientation.
  static ElementCell standalone(std::vector<Point> vertices);
  static ElementCell from_mesh(const PolygonalMesh& mesh, int cell);

  ElementCell(std::vector<Point> vertices, std::vector<double> vertex_scale, std::vector<int> edge_sign);

  [[nodiscard]] int n_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] const Point& vertex(int i) const { return vertices_[i]; }
  [[nodiscard]] double vertex_scale(int i) const { return vertex_scale_[i]; }
  [[nodiscard]] int edge_sign(int j) const { return edge_sign_[j]; }

  [[nodiscard]] const Point& centroid() const noexcept { return centroid_; }
  [[nodiscard]] double diameter() const noexcept { return diameter_; }
  [[nodiscard]] double area() const noexcept { return area_; }

  [[nodiscard]] const Point& edge_start(int j) const { return vertices_[j]; }
  [[nodiscard]] const Point& edge_end(int j) const { return vertices_[(j + 1) % n_vertices()]; }
  [[nodiscard]] double edge_length(int j) const { return (edge_end(j) - edge_start(j)).norm(); }
  [[nodiscard]] Point edge_tangent(int j) const { return (edge_end(j) - edge_start(j)).normalized(); }
  /// Outward unit normal.
  [[nodiscard]] Point edge_normal(int j) const {
    const Point t = edge_tangent(j);
    return {t.y(), -t.x()};
  }
  /// Point at edge parameter xi in [-1/2, 1/2] (counterclockwise).
  [[nodiscard]] Point edge_point(int j, double xi) const {
    return 0.5 * (edge_start(j) + edge_end(j)) + xi * (edge_end(j) - edge_start(j));
  }

  [[nodiscard]] ScaledMonomialBasis basis(int degree) const { return {centroid_, diameter_, degree}; }

  /// Cached volume rule of the given polynomial exactness.
  [[nodiscard]] const QuadratureRule& volume_rule(int order) const;

  /// Gram matrix of the scaled monomials up to `degree`.
  [[nodiscard]] Eigen::MatrixXd gram(int degree) const;

 private:
  std::vector<Point> vertices_;
  std::vector<double> vertex_scale_;
  std::vector<int> edge_sign_;
  Point centroid_;
  double diameter_ = 0.0;
  double area_ = 0.0;
  mutable std::map<int, QuadratureRule> rules_;
};

/// Gauss points on [-1/2, 1/2].
struct LineRule {
  std::vector<double> xi;
  std::vector<double> w;
};

LineRule line_rule(int npts);

}  // namespace vemb
