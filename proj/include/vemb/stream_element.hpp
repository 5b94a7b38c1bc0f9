#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "vemb/cell.hpp"

namespace vemb {

/// Local slot ordering of the C1 space of degree k:
///   vertex i: [3i] value, [3i+1] h_v dphi/dx, [3i+2] h_v dphi/dy;
///   edge j (after all vertices): normal-derivative moments of degree 0..k-3,
///   then trace moments of degree 0..khat-4;
///   interior (last): moments against the scaled monomials of degree <= k-4.
/// Edge moments use the global edge parameter, so they are shared verbatim by
/// the two cells adjacent to an edge.
struct StreamLayout {
  int k = 2;
  int n_vertices = 0;

  StreamLayout(int k, int n_vertices);

  [[nodiscard]] int khat() const noexcept { return k < 3 ? 3 : k; }
  [[nodiscard]] int n_normal_moments() const noexcept { return k - 2; }
  [[nodiscard]] int n_trace_moments() const noexcept { return khat() - 3; }
  [[nodiscard]] int per_edge() const noexcept { return n_normal_moments() + n_trace_moments(); }
  [[nodiscard]] int n_interior() const noexcept { return poly_dim(k - 4); }

  [[nodiscard]] int value(int i) const noexcept { return 3 * i; }
  [[nodiscard]] int grad(int i, int d) const noexcept { return 3 * i + 1 + d; }
  [[nodiscard]] int normal_moment(int j, int m) const noexcept { return 3 * n_vertices + j * per_edge() + m; }
  [[nodiscard]] int trace_moment(int j, int m) const noexcept {
    return 3 * n_vertices + j * per_edge() + n_normal_moments() + m;
  }
  [[nodiscard]] int interior(int a) const noexcept { return 3 * n_vertices + n_vertices * per_edge() + a; }
  [[nodiscard]] int size() const noexcept { return 3 * n_vertices + n_vertices * per_edge() + n_interior(); }
};

/// Polynomials along local edge j in the counterclockwise parameter
/// xi in [-1/2, 1/2], as maps from the local DOF vector to monomial
/// coefficients in xi.
struct EdgeTrace {
  Eigen::MatrixXd trace;   ///< (khat+1) x ndof: phi restricted to the edge
  Eigen::MatrixXd normal;  ///< k x ndof: outward normal derivative
};

EdgeTrace edge_trace(const ElementCell& cell, const StreamLayout& layout, int edge);

struct StreamSample {
  double value = 0.0;
  Point grad = Point::Zero();
};

using StreamFunction = std::function<StreamSample(const Point&)>;

struct StreamProjectors {
  Eigen::MatrixXd PiD;       ///< dim P_k rows
  Eigen::MatrixXd PiC;       ///< dim P_k rows
  Eigen::MatrixXd PiL2_km2;  ///< dim P_{k-2} rows
  Eigen::MatrixXd PiLap;     ///< dim P_{k-2} rows
  Eigen::MatrixXd PiGradX, PiGradY;  ///< dim P_{k-1} rows each
  Eigen::MatrixXd PiCurlX, PiCurlY;  ///< curl = (d/dy, -d/dx)
};

/// The local C1 element: traces, projectors and the DOF functionals.
class StreamElement {
 public:
  StreamElement(ElementCell cell, int k);

  [[nodiscard]] const ElementCell& cell() const noexcept { return cell_; }
  [[nodiscard]] const StreamLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] int k() const noexcept { return layout_.k; }
  [[nodiscard]] int ndof() const noexcept { return layout_.size(); }
  [[nodiscard]] const EdgeTrace& trace(int edge) const { return traces_[edge]; }
  [[nodiscard]] const StreamProjectors& projectors() const noexcept { return proj_; }
  /// Columns: DOFs of each scaled monomial of degree <= k.
  [[nodiscard]] const Eigen::MatrixXd& dof_matrix() const noexcept { return D_; }
  /// int_E m_b phi for |b| <= k-2, as a map from DOFs.
  [[nodiscard]] const Eigen::MatrixXd& moments() const noexcept { return moments_; }

  [[nodiscard]] Eigen::VectorXd interpolate(const StreamFunction& f) const;

 private:
  ElementCell cell_;
  StreamLayout layout_;
  std::vector<EdgeTrace> traces_;
  Eigen::MatrixXd D_;
  Eigen::MatrixXd moments_;
  StreamProjectors proj_;
};

/// DOF vector of a smooth function on a cell.
Eigen::VectorXd interpolate_stream(const ElementCell& cell, const StreamLayout& layout, const StreamFunction& f);

Eigen::MatrixXd build_pi_d(const ElementCell& cell, const StreamLayout& layout, const std::vector<EdgeTrace>& traces);

/// Moments int_E m_b phi, |b| <= k-2; the top two degrees come from the enhancement.
Eigen::MatrixXd stream_moments(const ElementCell& cell, const StreamLayout& layout, const Eigen::MatrixXd& PiD);

Eigen::MatrixXd build_pi_c(const ElementCell& cell, const StreamLayout& layout, const std::vector<EdgeTrace>& traces,
                           const Eigen::MatrixXd& moments);

void build_l2_projections(const ElementCell& cell, const StreamLayout& layout, const std::vector<EdgeTrace>& traces,
                          const Eigen::MatrixXd& moments, StreamProjectors& out);

/// Solve a small dense projector system; throws Error(singular) when the
/// matrix is numerically rank deficient.
Eigen::MatrixXd solve_local(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const char* what);

}  // namespace vemb
