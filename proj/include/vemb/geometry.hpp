#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace vemb {

using Point = Eigen::Vector2d;

/// Signed area of a closed polygon (positive for counterclockwise loops).
double signed_area(std::span<const Point> polygon);

/// Area centroid of a polygon with nonzero area.
Point polygon_centroid(std::span<const Point> polygon);

/// Largest distance between two vertices.
double polygon_diameter(std::span<const Point> polygon);

/// True when no two non-adjacent edges touch.
bool is_simple_polygon(std::span<const Point> polygon);

/// Largest ball contained in the kernel of a counterclockwise polygon.
///
/// The kernel is the intersection of the inner half-planes of all edges; every
/// point of it sees the whole polygon. The Chebyshev centre is found by
/// enumerating the vertices of the 3-variable linear program
///   max r  s.t.  nu_e . (c - a_e) >= r  for every edge e,
/// which is exact for the small polygons we deal with. A negative radius
/// means the kernel is empty.
struct KernelBall {
  Point center = Point::Zero();
  double radius = 0.0;
};

KernelBall kernel_chebyshev_ball(std::span<const Point> polygon);

/// Point-in-polygon test (boundary counts as inside up to `tol`).
bool point_in_polygon(std::span<const Point> polygon, const Point& p, double tol = 1e-12);

}  // namespace vemb
