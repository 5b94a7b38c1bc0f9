#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "vemb/error.hpp"
#include "vemb/mesh.hpp"

namespace vemb {

std::string_view to_string(MeshFamily family) noexcept {
  switch (family) {
    case MeshFamily::quad_distorted: return "quad_distorted";
    case MeshFamily::triangular: return "triangular";
    case MeshFamily::voronoi: return "voronoi";
    case MeshFamily::concave_rhombic: return "concave_rhombic";
    case MeshFamily::quad_uniform: return "quad_uniform";
  }
  return "quad_uniform";
}

MeshFamily parse_mesh_family(std::string_view name) {
  for (auto f : {MeshFamily::quad_distorted, MeshFamily::triangular, MeshFamily::voronoi, MeshFamily::concave_rhombic,
                 MeshFamily::quad_uniform}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorCategory::config, fmt::format("unknown mesh family '{}'", name));
}

namespace {

// mt19937_64 is portable; the distributions of <random> are not
class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

int grid_index(int n, int i, int j) { return j * (n + 1) + i; }

std::vector<Point> grid_vertices(int n) {
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
  return v;
}

PolygonalMesh quad_grid(int n, double amplitude, std::uint64_t seed) {
  auto v = grid_vertices(n);
  if (amplitude > 0) {
    Uniform rng(seed);
    for (int j = 1; j < n; ++j) {
      for (int i = 1; i < n; ++i) {
        const double r = amplitude * rng();
        const double a = 2.0 * M_PI * rng();
        v[grid_index(n, i, j)] += Point(r * std::cos(a), r * std::sin(a));
      }
    }
  }
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      cells.push_back({grid_index(n, i, j), grid_index(n, i + 1, j), grid_index(n, i + 1, j + 1), grid_index(n, i, j + 1)});
  return PolygonalMesh(std::move(v), std::move(cells));
}

PolygonalMesh triangles(int n) {
  auto v = grid_vertices(n);
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = grid_index(n, i, j);
      const int b = grid_index(n, i + 1, j);
      const int c = grid_index(n, i + 1, j + 1);
      const int d = grid_index(n, i, j + 1);
      cells.push_back({a, b, c});
      cells.push_back({a, c, d});
    }
  }
  return PolygonalMesh(std::move(v), std::move(cells));
}

PolygonalMesh concave(int n) {
  auto v = grid_vertices(n);
  std::vector<std::vector<int>> cells;
  const double hx = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = grid_index(n, i, j);
      const int b = grid_index(n, i + 1, j);
      const int c = grid_index(n, i + 1, j + 1);
      const int d = grid_index(n, i, j + 1);
      const bool even = (i + j) % 2 == 0;
      const Point p = v[a] + hx * (even ? Point(0.7, 0.3) : Point(0.3, 0.7));
      const int pi = static_cast<int>(v.size());
      v.push_back(p);
      if (even) {
        cells.push_back({a, b, c, pi});
        cells.push_back({a, pi, c, d});
      } else {
        cells.push_back({a, b, c, pi});
        cells.push_back({c, d, a, pi});
      }
    }
  }
  return PolygonalMesh(std::move(v), std::move(cells));
}

// clip a convex polygon to {x : dot(x - m, d) <= 0}
std::vector<Point> clip(const std::vector<Point>& poly, const Point& m, const Point& d) {
  std::vector<Point> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    const double sp = (p - m).dot(d);
    const double sq = (q - m).dot(d);
    if (sp <= 0) out.push_back(p);
    if ((sp < 0 && sq > 0) || (sp > 0 && sq < 0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  return out;
}

std::vector<std::vector<Point>> voronoi_cells(const std::vector<Point>& sites, int n) {
  const int ring = 3;
  std::vector<std::vector<Point>> result(sites.size());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Point& s = sites[j * n + i];
      std::vector<Point> poly{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
      for (int jj = std::max(0, j - ring); jj <= std::min(n - 1, j + ring); ++jj) {
        for (int ii = std::max(0, i - ring); ii <= std::min(n - 1, i + ring); ++ii) {
          if (ii == i && jj == j) continue;
          const Point& o = sites[jj * n + ii];
          poly = clip(poly, 0.5 * (s + o), o - s);
        }
      }
      result[j * n + i] = std::move(poly);
    }
  }
  return result;
}

PolygonalMesh voronoi(int n, std::uint64_t seed) {
  Uniform rng(seed);
  std::vector<Point> sites;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5 + 0.6 * (rng() - 0.5)) / n;
      const double y = (j + 0.5 + 0.6 * (rng() - 0.5)) / n;
      sites.emplace_back(x, y);
    }
  }
  for (int sweep = 0; sweep < 2; ++sweep) {
    const auto cells = voronoi_cells(sites, n);
    for (std::size_t c = 0; c < cells.size(); ++c) sites[c] = polygon_centroid(cells[c]);
  }
  const auto polys = voronoi_cells(sites, n);

  // weld coincident corners through a hash grid
  const double weld = 1e-9;
  std::vector<Point> vertices;
  std::unordered_map<std::int64_t, std::vector<int>> buckets;
  auto key = [](std::int64_t a, std::int64_t b) { return a * 4000000007LL + b; };
  auto find_or_add = [&](const Point& p) {
    const auto bx = static_cast<std::int64_t>(std::floor(p.x() / (4 * weld)));
    const auto by = static_cast<std::int64_t>(std::floor(p.y() / (4 * weld)));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = buckets.find(key(bx + dx, by + dy));
        if (it == buckets.end()) continue;
        for (int v : it->second)
          if ((vertices[v] - p).norm() < weld) return v;
      }
    }
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(p);
    buckets[key(bx, by)].push_back(id);
    return id;
  };
  std::vector<std::vector<int>> loops;
  for (const auto& poly : polys) {
    std::vector<int> loop;
    for (const auto& p : poly) {
      const int id = find_or_add(p);
      if (loop.empty() || loop.back() != id) loop.push_back(id);
    }
    while (loop.size() > 1 && loop.front() == loop.back()) loop.pop_back();
    loops.push_back(std::move(loop));
  }

  // snap boundary coordinates exactly
  for (auto& p : vertices) {
    for (int d = 0; d < 2; ++d) {
      if (std::abs(p[d]) < 1e-12) p[d] = 0.0;
      if (std::abs(p[d] - 1.0) < 1e-12) p[d] = 1.0;
    }
  }

  // collapse short edges; boundary and corner vertices keep their position
  auto rank = [&](int v) {
    const Point& p = vertices[v];
    const int bx = (p.x() == 0.0 || p.x() == 1.0) ? 1 : 0;
    const int by = (p.y() == 0.0 || p.y() == 1.0) ? 1 : 0;
    return bx + by;
  };
  const double min_len = 0.1 / n;
  std::vector<int> parent(vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& loop : loops) {
      for (std::size_t j = 0; j < loop.size() && loop.size() > 3; ++j) {
        const int a = loop[j];
        const int b = loop[(j + 1) % loop.size()];
        if ((vertices[a] - vertices[b]).norm() >= min_len) continue;
        const int ra = rank(a);
        const int rb = rank(b);
        if (ra == 2 && rb == 2) continue;
        int keep = a;
        int drop = b;
        if (rb > ra) std::swap(keep, drop);
        if (ra == rb) {
          if (ra == 1) {
            // both on the same side: stay on it
            if (vertices[a].x() != vertices[b].x() && vertices[a].y() != vertices[b].y()) continue;
          }
          vertices[keep] = 0.5 * (vertices[a] + vertices[b]);
        }
        parent[drop] = keep;
        changed = true;
        break;
      }
      if (changed) break;
    }
    if (changed) {
      for (auto& loop : loops) {
        std::vector<int> next;
        for (int v : loop) {
          while (parent[v] != v) v = parent[v];
          if (next.empty() || next.back() != v) next.push_back(v);
        }
        while (next.size() > 1 && next.front() == next.back()) next.pop_back();
        loop = std::move(next);
      }
    }
  }

  // compact unused vertices
  std::vector<int> remap(vertices.size(), -1);
  std::vector<Point> used;
  for (auto& loop : loops) {
    for (int& v : loop) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(used.size());
        used.push_back(vertices[v]);
      }
      v = remap[v];
    }
  }
  return PolygonalMesh(std::move(used), std::move(loops));
}

}  // namespace

PolygonalMesh generate_family(MeshFamily family, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCategory::config, fmt::format("mesh subdivision n must be >= 1, got {}", n));
  switch (family) {
    case MeshFamily::quad_uniform: return quad_grid(n, 0.0, seed);
    case MeshFamily::quad_distorted: return quad_grid(n, 0.2 / n, seed);
    case MeshFamily::triangular: return triangles(n);
    case MeshFamily::voronoi: return voronoi(n, seed);
    case MeshFamily::concave_rhombic: return concave(n);
  }
  throw Error(ErrorCategory::config, "unknown mesh family");
}

}  // namespace vemb
