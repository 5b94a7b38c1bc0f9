#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vemb/geometry.hpp"

namespace vemb {

enum class Wall { left, right, bottom, top, other };

std::string_view to_string(Wall wall) noexcept;

/// A mesh edge. Endpoints are stored with v[0] < v[1]; that order fixes the
/// global orientation (tangent from v[0] to v[1], normal = tangent rotated
/// clockwise) used by every edge degree of freedom.
struct Edge {
  std::array<int, 2> v{};
  std::array<int, 2> cells{-1, -1};  ///< cells[1] == -1 on the boundary
  double length = 0.0;
  Point tangent = Point::Zero();
  Point normal = Point::Zero();

  [[nodiscard]] bool on_boundary() const noexcept { return cells[1] < 0; }
};

struct CellGeometry {
  double diameter = 0.0;
  Point centroid = Point::Zero();
  double area = 0.0;
};

/// Immutable polygonal mesh of a planar domain.
///
/// Cells are counterclockwise vertex loops. Construction derives the edge
/// list, boundary wall tags and per-cell geometry, and throws
/// Error(topology) when a cell is clockwise or self-intersecting or an edge is
/// shared by more than two cells.
class PolygonalMesh {
 public:
  PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells);

  [[nodiscard]] int n_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int n_cells() const noexcept { return static_cast<int>(cells_.size()); }
  [[nodiscard]] int n_edges() const noexcept { return static_cast<int>(edges_.size()); }
  [[nodiscard]] int n_boundary_edges() const noexcept;

  [[nodiscard]] const Point& vertex(int v) const { return vertices_[v]; }
  [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
  [[nodiscard]] const std::vector<int>& cell(int c) const { return cells_[c]; }
  [[nodiscard]] const std::vector<std::vector<int>>& cells() const noexcept { return cells_; }
  [[nodiscard]] std::vector<Point> cell_points(int c) const;

  [[nodiscard]] const Edge& edge(int e) const { return edges_[e]; }
  /// Global edge ids of cell c; local edge j joins cell(c)[j] and cell(c)[j+1].
  [[nodiscard]] const std::vector<int>& cell_edges(int c) const { return cell_edges_[c]; }
  /// True when local edge j of cell c runs against the global edge orientation.
  [[nodiscard]] bool edge_flipped(int c, int j) const;

  [[nodiscard]] const CellGeometry& geometry(int c) const { return geometry_[c]; }
  /// h_v: mean diameter of the cells sharing vertex v.
  [[nodiscard]] double vertex_scale(int v) const { return vertex_scale_[v]; }
  /// Global mesh size: the largest cell diameter.
  [[nodiscard]] double h() const noexcept { return h_; }

  [[nodiscard]] std::optional<Wall> boundary_wall(int e) const;
  [[nodiscard]] bool is_boundary_vertex(int v) const { return !vertex_walls_[v].empty(); }
  /// Walls of the boundary edges incident to v (empty for interior vertices).
  [[nodiscard]] const std::vector<Wall>& vertex_walls(int v) const { return vertex_walls_[v]; }

  /// FNV-1a hash over coordinates and connectivity; identifies a mesh in checkpoints.
  [[nodiscard]] std::uint64_t hash() const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<CellGeometry> geometry_;
  std::vector<double> vertex_scale_;
  std::vector<std::optional<Wall>> edge_wall_;
  std::vector<std::vector<Wall>> vertex_walls_;
  double h_ = 0.0;
};

/// Reads the text mesh format: `NV NC`, NV lines `x y`, NC lines `m i1 ... im`.
PolygonalMesh load_mesh(const std::filesystem::path& path);
PolygonalMesh parse_mesh(std::string_view text);
void save_mesh(const PolygonalMesh& mesh, const std::filesystem::path& path);
std::string format_mesh(const PolygonalMesh& mesh);

enum class MeshFamily { quad_distorted, triangular, voronoi, concave_rhombic, quad_uniform };

std::string_view to_string(MeshFamily family) noexcept;
MeshFamily parse_mesh_family(std::string_view name);

/// Deterministic generator of the five mesh families on the unit square.
/// `n` is the number of subdivisions per side (nominal h = 1/n).
PolygonalMesh generate_family(MeshFamily family, int n, std::uint64_t seed = 0);

struct CellFinding {
  int cell = -1;
  double edge_ratio = 0.0;    ///< min edge length / h_E
  double kernel_ratio = 0.0;  ///< kernel Chebyshev radius / h_E
  bool a1 = true;             ///< star-shaped w.r.t. a ball of radius rho h_E
  bool a2 = true;             ///< every edge at least rho h_E long
};

struct ValidationReport {
  double rho = 0.0;
  double min_edge_ratio = 0.0;
  double min_kernel_ratio = 0.0;
  std::vector<CellFinding> violations;

  [[nodiscard]] bool passed() const noexcept { return violations.empty(); }
};

CellFinding inspect_cell(std::span<const Point> polygon, double rho);
ValidationReport validate(const PolygonalMesh& mesh, double rho);

}  // namespace vemb
