#include "vemb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace vemb {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_touch(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double d1 = orient(c, d, a);
  const double d2 = orient(c, d, b);
  const double d3 = orient(a, b, c);
  const double d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

}  // namespace

double signed_area(std::span<const Point> polygon) {
  double a = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(polygon[i], polygon[(i + 1) % n]);
  return 0.5 * a;
}

Point polygon_centroid(std::span<const Point> polygon) {
  // shift to the first vertex to limit cancellation
  const std::size_t n = polygon.size();
  const Point o = polygon[0];
  double a = 0.0;
  Point c = Point::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = polygon[i] - o;
    const Point q = polygon[(i + 1) % n] - o;
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  return o + c / (3.0 * a);
}

double polygon_diameter(std::span<const Point> polygon) {
  double d = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i)
    for (std::size_t j = i + 1; j < polygon.size(); ++j) d = std::max(d, (polygon[i] - polygon[j]).norm());
  return d;
}

bool is_simple_polygon(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (polygon[i] == polygon[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_touch(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

KernelBall kernel_chebyshev_ball(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  std::vector<Point> nu(n);
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point t = polygon[(i + 1) % n] - polygon[i];
    t.normalize();
    nu[i] = Point(-t.y(), t.x());
    rhs[i] = nu[i].dot(polygon[i]);
  }
  KernelBall best;
  best.radius = -std::numeric_limits<double>::infinity();
  const double scale = polygon_diameter(polygon);
  const double tol = 1e-12 * scale;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        Eigen::Matrix3d m;
        Eigen::Vector3d r;
        const std::size_t idx[3] = {a, b, c};
        for (int k = 0; k < 3; ++k) {
          m(k, 0) = nu[idx[k]].x();
          m(k, 1) = nu[idx[k]].y();
          m(k, 2) = -1.0;
          r(k) = rhs[idx[k]];
        }
        if (std::abs(m.determinant()) < 1e-12) continue;
        const Eigen::Vector3d s = m.partialPivLu().solve(r);
        if (s(2) <= best.radius) continue;
        bool feasible = true;
        for (std::size_t e = 0; e < n && feasible; ++e) {
          feasible = nu[e].dot(s.head<2>()) - s(2) >= rhs[e] - tol;
        }
        if (feasible) {
          best.center = s.head<2>();
          best.radius = s(2);
        }
      }
    }
  }
  if (!std::isfinite(best.radius)) {
    best.center = polygon_centroid(polygon);
    best.radius = -scale;
  }
  return best;
}

bool point_in_polygon(std::span<const Point> polygon, const Point& p, double tol) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    if ((a + s * ab - p).norm() <= tol) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = polygon[i];
    const Point& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace vemb
