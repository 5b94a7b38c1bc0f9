#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "vemb/cell.hpp"

namespace vemb {

/// Local slot ordering of the C0 space of degree l:
///   vertex values, then per edge the moments of degree 0..l-2 (global edge
///   parameter), then interior moments of degree <= l-2.
struct TempLayout {
  int ell = 1;
  int n_vertices = 0;

  TempLayout(int ell, int n_vertices);

  [[nodiscard]] int per_edge() const noexcept { return ell - 1; }
  [[nodiscard]] int n_interior() const noexcept { return poly_dim(ell - 2); }
  [[nodiscard]] int value(int i) const noexcept { return i; }
  [[nodiscard]] int edge_moment(int j, int m) const noexcept { return n_vertices + j * per_edge() + m; }
  [[nodiscard]] int interior(int a) const noexcept { return n_vertices + n_vertices * per_edge() + a; }
  [[nodiscard]] int size() const noexcept { return n_vertices + n_vertices * per_edge() + n_interior(); }
};

using ScalarFunction = std::function<double(const Point&)>;

struct TempProjectors {
  Eigen::MatrixXd PiNabla;   ///< dim P_l rows
  Eigen::MatrixXd PiL2_l;    ///< dim P_l rows
  Eigen::MatrixXd PiL2_lm1;  ///< dim P_{l-1} rows
  Eigen::MatrixXd PiGradX, PiGradY;  ///< dim P_{l-1} rows
};

class TempElement {
 public:
  TempElement(ElementCell cell, int ell);

  [[nodiscard]] const ElementCell& cell() const noexcept { return cell_; }
  [[nodiscard]] const TempLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] int ell() const noexcept { return layout_.ell; }
  [[nodiscard]] int ndof() const noexcept { return layout_.size(); }
  /// (l+1) x ndof map to the xi-monomial coefficients of the trace on local edge j.
  [[nodiscard]] const Eigen::MatrixXd& trace(int edge) const { return traces_[edge]; }
  [[nodiscard]] const TempProjectors& projectors() const noexcept { return proj_; }
  [[nodiscard]] const Eigen::MatrixXd& dof_matrix() const noexcept { return D_; }
  /// int_E m_b w for |b| <= l.
  [[nodiscard]] const Eigen::MatrixXd& moments() const noexcept { return moments_; }

  [[nodiscard]] Eigen::VectorXd interpolate(const ScalarFunction& f) const;

 private:
  ElementCell cell_;
  TempLayout layout_;
  std::vector<Eigen::MatrixXd> traces_;
  Eigen::MatrixXd D_;
  Eigen::MatrixXd moments_;
  TempProjectors proj_;
};

Eigen::VectorXd interpolate_temp(const ElementCell& cell, const TempLayout& layout, const ScalarFunction& f);

TempProjectors build_temp_projectors(const ElementCell& cell, const TempLayout& layout,
                                     const std::vector<Eigen::MatrixXd>& traces, Eigen::MatrixXd* moments = nullptr);

std::vector<Eigen::MatrixXd> temp_traces(const ElementCell& cell, const TempLayout& layout);

}  // namespace vemb
