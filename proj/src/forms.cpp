#include "vemb/forms.hpp"

namespace vemb {

PointTables tabulate(const StreamElement& s, const TempElement& t, int order) {
  const auto& cell = s.cell();
  const auto& rule = cell.volume_rule(order);
  const int k = s.k();
  const int l = t.ell();
  const int n1 = poly_dim(k - 1);
  const int n2 = poly_dim(k - 2);
  const int m1 = poly_dim(l - 1);
  const auto bs = cell.basis(std::max(k - 1, l - 1));
  const auto& ps = s.projectors();
  const auto& pt = t.projectors();
  const int nq = static_cast<int>(rule.size());
  PointTables tab;
  tab.points = rule.points;
  tab.weights = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), nq);
  tab.lap.resize(nq, s.ndof());
  tab.curlx.resize(nq, s.ndof());
  tab.curly.resize(nq, s.ndof());
  tab.gradx.resize(nq, s.ndof());
  tab.grady.resize(nq, s.ndof());
  tab.tval.resize(nq, t.ndof());
  tab.tgradx.resize(nq, t.ndof());
  tab.tgrady.resize(nq, t.ndof());
  for (int q = 0; q < nq; ++q) {
    const Eigen::VectorXd m = bs.values(rule.points[q]);
    tab.lap.row(q) = m.head(n2).transpose() * ps.PiLap;
    tab.gradx.row(q) = m.head(n1).transpose() * ps.PiGradX;
    tab.grady.row(q) = m.head(n1).transpose() * ps.PiGradY;
    tab.tval.row(q) = m.head(m1).transpose() * pt.PiL2_lm1;
    tab.tgradx.row(q) = m.head(m1).transpose() * pt.PiGradX;
    tab.tgrady.row(q) = m.head(m1).transpose() * pt.PiGradY;
  }
  tab.curlx = tab.grady;
  tab.curly = -tab.gradx;
  return tab;
}

namespace {

Eigen::MatrixXd stiffness(const ElementCell& cell, int degree) {
  const int N = poly_dim(degree);
  const auto b = cell.basis(degree);
  const auto& rule = cell.volume_rule(std::max(1, 2 * degree - 2));
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::MatrixXd G = b.gradients(rule.points[q]);
    K.noalias() += rule.weights[q] * G.transpose() * G;
  }
  return K;
}

Eigen::MatrixXd hessian_stiffness(const ElementCell& cell, int degree) {
  const int N = poly_dim(degree);
  const auto b = cell.basis(degree);
  const auto& rule = cell.volume_rule(std::max(1, 2 * degree - 4));
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::MatrixXd H = b.hessians(rule.points[q]);
    K.noalias() += rule.weights[q] * (H.row(0).transpose() * H.row(0) + 2.0 * H.row(1).transpose() * H.row(1) +
                                      H.row(2).transpose() * H.row(2));
  }
  return K;
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> local_MF_AF(const StreamElement& s, const StabilizationWeights& w) {
  const auto& cell = s.cell();
  const auto& p = s.projectors();
  const Eigen::MatrixXd& D = s.dof_matrix();
  const int nd = s.ndof();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nd, nd);
  const Eigen::MatrixXd rc = I - D * p.PiC;
  const Eigen::MatrixXd rd = I - D * p.PiD;
  const double h = cell.diameter();
  Eigen::MatrixXd MF = p.PiC.transpose() * stiffness(cell, s.k()) * p.PiC + w.mf * rc.transpose() * rc;
  Eigen::MatrixXd AF =
      p.PiD.transpose() * hessian_stiffness(cell, s.k()) * p.PiD + (w.af / (h * h)) * rd.transpose() * rd;
  MF = 0.5 * (MF + MF.transpose()).eval();
  AF = 0.5 * (AF + AF.transpose()).eval();
  return {MF, AF};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> local_MT_AT(const TempElement& t, const StabilizationWeights& w) {
  const auto& cell = t.cell();
  const auto& p = t.projectors();
  const Eigen::MatrixXd& D = t.dof_matrix();
  const int nd = t.ndof();
  const int l = t.ell();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nd, nd);
  const Eigen::MatrixXd r0 = I - D * p.PiL2_l;
  const Eigen::MatrixXd rn = I - D * p.PiNabla;
  const double h = cell.diameter();
  const Eigen::MatrixXd G = cell.gram(l);
  const Eigen::MatrixXd G1 = G.topLeftCorner(poly_dim(l - 1), poly_dim(l - 1));
  Eigen::MatrixXd MT = p.PiL2_l.transpose() * G * p.PiL2_l + (w.mt * h * h) * r0.transpose() * r0;
  Eigen::MatrixXd AT = p.PiGradX.transpose() * G1 * p.PiGradX + p.PiGradY.transpose() * G1 * p.PiGradY +
                       w.at * rn.transpose() * rn;
  MT = 0.5 * (MT + MT.transpose()).eval();
  AT = 0.5 * (AT + AT.transpose()).eval();
  return {MT, AT};
}

Eigen::MatrixXd local_BF(const PointTables& tab, const Eigen::VectorXd& zeta) {
  const Eigen::VectorXd a = tab.weights.cwiseProduct(tab.lap * zeta);
  return tab.gradx.transpose() * a.asDiagonal() * tab.curlx + tab.grady.transpose() * a.asDiagonal() * tab.curly;
}

Eigen::MatrixXd local_BF_first(const PointTables& tab, const Eigen::VectorXd& phi) {
  const Eigen::VectorXd cx = tab.weights.cwiseProduct(tab.curlx * phi);
  const Eigen::VectorXd cy = tab.weights.cwiseProduct(tab.curly * phi);
  return tab.gradx.transpose() * cx.asDiagonal() * tab.lap + tab.grady.transpose() * cy.asDiagonal() * tab.lap;
}

double eval_BF(const PointTables& tab, const Eigen::VectorXd& zeta, const Eigen::VectorXd& phi,
               const Eigen::VectorXd& chi) {
  const Eigen::ArrayXd a = (tab.lap * zeta).array();
  const Eigen::ArrayXd v = (tab.curlx * phi).array() * (tab.gradx * chi).array() +
                           (tab.curly * phi).array() * (tab.grady * chi).array();
  return (tab.weights.array() * a * v).sum();
}

Eigen::MatrixXd local_BT(const PointTables& tab, const Eigen::VectorXd& psi) {
  const Eigen::VectorXd ux = tab.weights.cwiseProduct(tab.curlx * psi);
  const Eigen::VectorXd uy = tab.weights.cwiseProduct(tab.curly * psi);
  return tab.tval.transpose() * (ux.asDiagonal() * tab.tgradx + uy.asDiagonal() * tab.tgrady);
}

Eigen::MatrixXd local_Bskew(const PointTables& tab, const Eigen::VectorXd& psi) {
  const Eigen::MatrixXd T = local_BT(tab, psi);
  return 0.5 * (T - T.transpose());
}

Eigen::MatrixXd local_Bskew_dpsi(const PointTables& tab, const Eigen::VectorXd& theta) {
  // B_T(psi; theta, w) - B_T(psi; w, theta), differentiated in psi
  const Eigen::VectorXd gx = tab.weights.cwiseProduct(tab.tgradx * theta);
  const Eigen::VectorXd gy = tab.weights.cwiseProduct(tab.tgrady * theta);
  const Eigen::VectorXd tv = tab.weights.cwiseProduct(tab.tval * theta);
  const Eigen::MatrixXd first = tab.tval.transpose() * (gx.asDiagonal() * tab.curlx + gy.asDiagonal() * tab.curly);
  const Eigen::MatrixXd second =
      tab.tgradx.transpose() * tv.asDiagonal() * tab.curlx + tab.tgrady.transpose() * tv.asDiagonal() * tab.curly;
  return 0.5 * (first - second);
}

Eigen::MatrixXd local_C(const StreamElement& s, const TempElement& t, const VectorFunction& g, double time) {
  const PointTables tab = tabulate(s, t, 2 * s.k() + 2);
  const int nq = static_cast<int>(tab.points.size());
  Eigen::VectorXd gx(nq), gy(nq);
  for (int q = 0; q < nq; ++q) {
    const Point v = g(tab.points[q], time);
    gx(q) = tab.weights(q) * v.x();
    gy(q) = tab.weights(q) * v.y();
  }
  return tab.tval.transpose() * (gx.asDiagonal() * tab.curlx + gy.asDiagonal() * tab.curly);
}

LocalLoads local_loads(const StreamElement& s, const TempElement& t, const VectorFunction& f_psi,
                       const TimeScalarFunction& f_theta, double time) {
  const PointTables tab = tabulate(s, t, 2 * s.k() + 2);
  const int nq = static_cast<int>(tab.points.size());
  Eigen::VectorXd fx(nq), fy(nq), ft(nq);
  for (int q = 0; q < nq; ++q) {
    const Point f = f_psi ? f_psi(tab.points[q], time) : Point::Zero();
    fx(q) = tab.weights(q) * f.x();
    fy(q) = tab.weights(q) * f.y();
    ft(q) = tab.weights(q) * (f_theta ? f_theta(tab.points[q], time) : 0.0);
  }
  LocalLoads r;
  r.psi = tab.curlx.transpose() * fx + tab.curly.transpose() * fy;
  r.theta = tab.tval.transpose() * ft;
  return r;
}

CellForms build_cell_forms(const StreamElement& s, const TempElement& t, const StabilizationWeights& w) {
  CellForms f;
  std::tie(f.MF, f.AF) = local_MF_AF(s, w);
  std::tie(f.MT, f.AT) = local_MT_AT(t, w);
  // exact for the cubic-in-k products of the trilinear forms
  const int order = std::max(3 * (s.k() - 1), (s.k() - 1) + 2 * (t.ell() - 1));
  f.tables = tabulate(s, t, std::max(order, 1));
  return f;
}

}  // namespace vemb
