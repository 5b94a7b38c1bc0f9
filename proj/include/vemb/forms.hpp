#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "vemb/stream_element.hpp"
#include "vemb/temp_element.hpp"

namespace vemb {

/// Multipliers of the four dofi-dofi stabilizations.
struct StabilizationWeights {
  double mf = 1.0;
  double af = 1.0;
  double mt = 1.0;
  double at = 1.0;
};

using VectorFunction = std::function<Point(const Point&, double)>;
using TimeScalarFunction = std::function<double(const Point&, double)>;

/// Projected fields tabulated at the quadrature points of one cell. Each row
/// maps local DOFs to the value of a projected polynomial at one point, so
/// every trilinear form reduces to weighted row products.
struct PointTables {
  std::vector<Point> points;
  Eigen::VectorXd weights;
  Eigen::MatrixXd lap;           ///< Pi^{k-2} Lap(zeta)        nq x nds
  Eigen::MatrixXd curlx, curly;  ///< Pi^{k-1} curl(phi)        nq x nds
  Eigen::MatrixXd gradx, grady;  ///< Pi^{k-1} grad(phi)        nq x nds
  Eigen::MatrixXd tval;          ///< Pi^{l-1} w                nq x ndt
  Eigen::MatrixXd tgradx, tgrady;  ///< Pi^{l-1} grad(w)        nq x ndt
};

PointTables tabulate(const StreamElement& s, const TempElement& t, int order);

/// Local matrices use the (test, trial) convention: entry (i, j) is the form
/// evaluated with the trial basis function j and the test basis function i.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> local_MF_AF(const StreamElement& s, const StabilizationWeights& w = {});
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> local_MT_AT(const TempElement& t, const StabilizationWeights& w = {});

/// B_F(zeta; phi, chi) as a matrix in (chi, phi) for fixed zeta.
Eigen::MatrixXd local_BF(const PointTables& tab, const Eigen::VectorXd& zeta);
/// B_F(zeta; phi, chi) as a matrix in (chi, zeta) for fixed phi.
Eigen::MatrixXd local_BF_first(const PointTables& tab, const Eigen::VectorXd& phi);
double eval_BF(const PointTables& tab, const Eigen::VectorXd& zeta, const Eigen::VectorXd& phi,
               const Eigen::VectorXd& chi);

/// B_T(psi; v, w) as a matrix in (w, v).
Eigen::MatrixXd local_BT(const PointTables& tab, const Eigen::VectorXd& psi);
/// Skew part: (B_T(psi; v, w) - B_T(psi; w, v)) / 2 in (w, v).
Eigen::MatrixXd local_Bskew(const PointTables& tab, const Eigen::VectorXd& psi);
/// d/dpsi of B_skew(psi; theta, w): matrix in (w, psi) for fixed theta.
Eigen::MatrixXd local_Bskew_dpsi(const PointTables& tab, const Eigen::VectorXd& theta);

/// C(w, phi) = int g Pi^{l-1} w . Pi^{k-1} curl phi, shape ndt x nds.
Eigen::MatrixXd local_C(const StreamElement& s, const TempElement& t, const VectorFunction& g, double time);

struct LocalLoads {
  Eigen::VectorXd psi;
  Eigen::VectorXd theta;
};

LocalLoads local_loads(const StreamElement& s, const TempElement& t, const VectorFunction& f_psi,
                       const TimeScalarFunction& f_theta, double time);

/// Everything one cell contributes to the discrete problem.
struct CellForms {
  Eigen::MatrixXd MF, AF, MT, AT;
  PointTables tables;
};

CellForms build_cell_forms(const StreamElement& s, const TempElement& t, const StabilizationWeights& w = {});

}  // namespace vemb
