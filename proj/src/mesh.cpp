#include "vemb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "vemb/error.hpp"

namespace vemb {

std::string_view to_string(Wall wall) noexcept {
  switch (wall) {
    case Wall::left: return "left";
    case Wall::right: return "right";
    case Wall::bottom: return "bottom";
    case Wall::top: return "top";
    case Wall::other: return "other";
  }
  return "other";
}

PolygonalMesh::PolygonalMesh(std::vector<Point> vertices, std::vector<std::vector<int>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const int nv = n_vertices();
  if (cells_.empty()) throw Error(ErrorCategory::topology, "mesh has no cells");

  std::map<std::pair<int, int>, int> edge_index;
  std::vector<int> first_from;
  cell_edges_.resize(cells_.size());
  geometry_.resize(cells_.size());
  for (int c = 0; c < n_cells(); ++c) {
    const auto& loop = cells_[c];
    if (loop.size() < 3) throw Error(ErrorCategory::topology, fmt::format("cell {} has fewer than 3 vertices", c));
    for (int v : loop) {
      if (v < 0 || v >= nv) throw Error(ErrorCategory::topology, fmt::format("cell {} references vertex {}", c, v));
    }
    const auto pts = cell_points(c);
    const double area = signed_area(pts);
    if (area <= 0.0) throw Error(ErrorCategory::topology, fmt::format("cell {} is not counterclockwise", c));
    if (!is_simple_polygon(pts)) throw Error(ErrorCategory::topology, fmt::format("cell {} is self-intersecting", c));
    geometry_[c] = CellGeometry{polygon_diameter(pts), polygon_centroid(pts), area};

    const int m = static_cast<int>(loop.size());
    for (int j = 0; j < m; ++j) {
      const int a = loop[j];
      const int b = loop[(j + 1) % m];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, n_edges());
      if (inserted) {
        Edge e;
        e.v = {key.first, key.second};
        e.cells = {c, -1};
        const Point d = vertices_[e.v[1]] - vertices_[e.v[0]];
        e.length = d.norm();
        e.tangent = d / e.length;
        e.normal = Point(e.tangent.y(), -e.tangent.x());
        edges_.push_back(e);
        first_from.push_back(a);
      } else {
        Edge& e = edges_[it->second];
        if (e.cells[1] >= 0) throw Error(ErrorCategory::topology, fmt::format("edge ({},{}) shared by more than two cells", a, b));
        if (first_from[it->second] == a) {
          throw Error(ErrorCategory::topology, fmt::format("edge ({},{}) traversed twice in the same direction", a, b));
        }
        e.cells[1] = c;
      }
      cell_edges_[c].push_back(it->second);
    }
  }

  h_ = 0.0;
  for (const auto& g : geometry_) h_ = std::max(h_, g.diameter);

  vertex_scale_.assign(nv, 0.0);
  std::vector<int> count(nv, 0);
  for (int c = 0; c < n_cells(); ++c) {
    for (int v : cells_[c]) {
      vertex_scale_[v] += geometry_[c].diameter;
      ++count[v];
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (count[v] > 0) vertex_scale_[v] /= count[v];
  }

  constexpr double tol = 1e-12;
  bool in_unit_square = true;
  for (const auto& p : vertices_) {
    if (p.x() < -tol || p.x() > 1 + tol || p.y() < -tol || p.y() > 1 + tol) in_unit_square = false;
  }
  edge_wall_.assign(edges_.size(), std::nullopt);
  vertex_walls_.assign(nv, {});
  for (int e = 0; e < n_edges(); ++e) {
    if (!edges_[e].on_boundary()) continue;
    const Point& a = vertices_[edges_[e].v[0]];
    const Point& b = vertices_[edges_[e].v[1]];
    Wall w = Wall::other;
    if (in_unit_square) {
      if (std::abs(a.x()) <= tol && std::abs(b.x()) <= tol) w = Wall::left;
      else if (std::abs(a.x() - 1) <= tol && std::abs(b.x() - 1) <= tol) w = Wall::right;
      else if (std::abs(a.y()) <= tol && std::abs(b.y()) <= tol) w = Wall::bottom;
      else if (std::abs(a.y() - 1) <= tol && std::abs(b.y() - 1) <= tol) w = Wall::top;
    }
    edge_wall_[e] = w;
    for (int v : edges_[e].v) {
      auto& walls = vertex_walls_[v];
      if (std::find(walls.begin(), walls.end(), w) == walls.end()) walls.push_back(w);
    }
  }
}

int PolygonalMesh::n_boundary_edges() const noexcept {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.on_boundary(); }));
}

std::vector<Point> PolygonalMesh::cell_points(int c) const {
  std::vector<Point> pts;
  pts.reserve(cells_[c].size());
  for (int v : cells_[c]) pts.push_back(vertices_[v]);
  return pts;
}

bool PolygonalMesh::edge_flipped(int c, int j) const {
  const auto& loop = cells_[c];
  return loop[j] > loop[(j + 1) % loop.size()];
}

std::optional<Wall> PolygonalMesh::boundary_wall(int e) const { return edge_wall_[e]; }

std::uint64_t PolygonalMesh::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : vertices_) {
    const double xy[2] = {p.x(), p.y()};
    feed(xy, sizeof xy);
  }
  for (const auto& loop : cells_) {
    const auto m = static_cast<std::int64_t>(loop.size());
    feed(&m, sizeof m);
    for (int v : loop) {
      const auto vv = static_cast<std::int64_t>(v);
      feed(&vv, sizeof vv);
    }
  }
  return h;
}

PolygonalMesh parse_mesh(std::string_view text) {
  std::istringstream in{std::string(text)};
  long long nv = 0;
  long long nc = 0;
  if (!(in >> nv >> nc) || nv < 3 || nc < 1) throw Error(ErrorCategory::parse, "bad mesh header");
  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices) {
    double x = 0;
    double y = 0;
    if (!(in >> x >> y)) throw Error(ErrorCategory::parse, "truncated vertex list");
    if (!std::isfinite(x) || !std::isfinite(y)) throw Error(ErrorCategory::parse, "non-finite vertex coordinate");
    p = Point(x, y);
  }
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nc));
  for (auto& loop : cells) {
    long long m = 0;
    if (!(in >> m) || m < 3) throw Error(ErrorCategory::parse, "bad cell vertex count");
    loop.resize(static_cast<std::size_t>(m));
    for (auto& v : loop) {
      long long idx = 0;
      if (!(in >> idx)) throw Error(ErrorCategory::parse, "truncated cell list");
      if (idx < 0 || idx >= nv) throw Error(ErrorCategory::parse, fmt::format("vertex index {} out of range", idx));
      v = static_cast<int>(idx);
    }
  }
  std::string rest;
  if (in >> rest) throw Error(ErrorCategory::parse, "trailing data after cell list");
  return PolygonalMesh(std::move(vertices), std::move(cells));
}

PolygonalMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, fmt::format("cannot open mesh file {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str());
}

std::string format_mesh(const PolygonalMesh& mesh) {
  std::string out = fmt::format("{} {}\n", mesh.n_vertices(), mesh.n_cells());
  for (const auto& p : mesh.vertices()) out += fmt::format("{:.17g} {:.17g}\n", p.x(), p.y());
  for (const auto& loop : mesh.cells()) {
    out += fmt::format("{}", loop.size());
    for (int v : loop) out += fmt::format(" {}", v);
    out += '\n';
  }
  return out;
}

void save_mesh(const PolygonalMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, fmt::format("cannot write mesh file {}", path.string()));
  out << format_mesh(mesh);
  if (!out) throw Error(ErrorCategory::io, fmt::format("write failed for {}", path.string()));
}

CellFinding inspect_cell(std::span<const Point> polygon, double rho) {
  CellFinding f;
  const double hE = polygon_diameter(polygon);
  double min_edge = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    min_edge = std::min(min_edge, (polygon[(i + 1) % polygon.size()] - polygon[i]).norm());
  }
  f.edge_ratio = min_edge / hE;
  f.kernel_ratio = kernel_chebyshev_ball(polygon).radius / hE;
  f.a1 = f.kernel_ratio >= rho;
  f.a2 = f.edge_ratio >= rho;
  return f;
}

ValidationReport validate(const PolygonalMesh& mesh, double rho) {
  ValidationReport report;
  report.rho = rho;
  report.min_edge_ratio = std::numeric_limits<double>::infinity();
  report.min_kernel_ratio = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto pts = mesh.cell_points(c);
    CellFinding f = inspect_cell(pts, rho);
    f.cell = c;
    report.min_edge_ratio = std::min(report.min_edge_ratio, f.edge_ratio);
    report.min_kernel_ratio = std::min(report.min_kernel_ratio, f.kernel_ratio);
    if (!f.a1 || !f.a2) report.violations.push_back(f);
  }
  return report;
}

}  // namespace vemb
