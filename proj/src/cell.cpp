#include "vemb/cell.hpp"

namespace vemb {

ElementCell::ElementCell(std::vector<Point> vertices, std::vector<double> vertex_scale, std::vector<int> edge_sign)
    : vertices_(std::move(vertices)), vertex_scale_(std::move(vertex_scale)), edge_sign_(std::move(edge_sign)) {
  centroid_ = polygon_centroid(vertices_);
  diameter_ = polygon_diameter(vertices_);
  area_ = signed_area(vertices_);
}

ElementCell ElementCell::standalone(std::vector<Point> vertices) {
  const double h = polygon_diameter(vertices);
  const std::size_t n = vertices.size();
  return ElementCell(std::move(vertices), std::vector<double>(n, h), std::vector<int>(n, 1));
}

ElementCell ElementCell::from_mesh(const PolygonalMesh& mesh, int cell) {
  const auto& loop = mesh.cell(cell);
  std::vector<double> hv;
  std::vector<int> sign;
  for (std::size_t j = 0; j < loop.size(); ++j) {
    hv.push_back(mesh.vertex_scale(loop[j]));
    sign.push_back(mesh.edge_flipped(cell, static_cast<int>(j)) ? -1 : 1);
  }
  return ElementCell(mesh.cell_points(cell), std::move(hv), std::move(sign));
}

const QuadratureRule& ElementCell::volume_rule(int order) const {
  auto it = rules_.find(order);
  if (it != rules_.end()) return it->second;
  return rules_.emplace(order, polygon_quadrature(vertices_, order)).first->second;
}

Eigen::MatrixXd ElementCell::gram(int degree) const {
  const int n = poly_dim(degree);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  if (n == 0) return G;
  const auto b = basis(degree);
  const auto& rule = volume_rule(2 * degree);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd m = b.values(rule.points[q]);
    G.noalias() += rule.weights[q] * m * m.transpose();
  }
  return G;
}

LineRule line_rule(int npts) {
  const auto [x, w] = gauss_legendre(npts);
  LineRule r;
  for (int i = 0; i < npts; ++i) {
    r.xi.push_back(x[i] - 0.5);
    r.w.push_back(w[i]);
  }
  return r;
}

}  // namespace vemb
