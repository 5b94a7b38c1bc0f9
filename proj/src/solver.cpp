#include "vemb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/SparseLU>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "vemb/error.hpp"

namespace vemb {

GlobalIndexMap build_index_map(const PolygonalMesh& mesh, int k, int ell, const BoundarySpec& bc) {
  GlobalIndexMap map;
  map.k = k;
  map.ell = ell;
  const int nv = mesh.n_vertices();
  const int ne = mesh.n_edges();
  const int nc = mesh.n_cells();
  const StreamLayout sl(k, 3);
  const TempLayout tl(ell, 3);
  const int spe = sl.per_edge();
  const int sni = sl.n_interior();
  const int tpe = tl.per_edge();
  const int tni = tl.n_interior();
  map.n_stream = 3 * nv + ne * spe + nc * sni;
  map.n_temp = nv + ne * tpe + nc * tni;

  map.stream_dofs.resize(nc);
  map.temp_dofs.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto& loop = mesh.cell(c);
    const auto& edges = mesh.cell_edges(c);
    const int m = static_cast<int>(loop.size());
    const StreamLayout ls(k, m);
    const TempLayout lt(ell, m);
    auto& sd = map.stream_dofs[c];
    auto& td = map.temp_dofs[c];
    sd.assign(ls.size(), -1);
    td.assign(lt.size(), -1);
    for (int i = 0; i < m; ++i) {
      sd[ls.value(i)] = 3 * loop[i];
      sd[ls.grad(i, 0)] = 3 * loop[i] + 1;
      sd[ls.grad(i, 1)] = 3 * loop[i] + 2;
      td[lt.value(i)] = loop[i];
    }
    for (int j = 0; j < m; ++j) {
      for (int q = 0; q < spe; ++q) sd[3 * m + j * spe + q] = 3 * nv + edges[j] * spe + q;
      for (int q = 0; q < tpe; ++q) td[lt.edge_moment(j, q)] = nv + edges[j] * tpe + q;
    }
    for (int a = 0; a < sni; ++a) sd[ls.interior(a)] = 3 * nv + ne * spe + c * sni + a;
    for (int a = 0; a < tni; ++a) td[lt.interior(a)] = nv + ne * tpe + c * tni + a;
  }

  std::vector<bool> s_fixed(map.n_stream, false);
  std::vector<bool> t_fixed(map.n_temp, false);
  for (int v = 0; v < nv; ++v) {
    if (!mesh.is_boundary_vertex(v)) continue;
    for (int d = 0; d < 3; ++d) s_fixed[3 * v + d] = true;
    bool any_dirichlet = false;
    bool any_natural = false;
    for (Wall w : mesh.vertex_walls(v)) (bc.dirichlet(w) ? any_dirichlet : any_natural) = true;
    if (any_dirichlet) t_fixed[v] = true;
    if (any_dirichlet && any_natural) ++map.n_corner_conflicts;
  }
  for (int e = 0; e < ne; ++e) {
    const auto wall = mesh.boundary_wall(e);
    if (!wall) continue;
    for (int q = 0; q < spe; ++q) s_fixed[3 * nv + e * spe + q] = true;
    if (bc.dirichlet(*wall))
      for (int q = 0; q < tpe; ++q) t_fixed[nv + e * tpe + q] = true;
  }
  if (map.n_corner_conflicts > 0) {
    spdlog::debug("{} boundary vertices join Dirichlet and insulated walls; Dirichlet applied", map.n_corner_conflicts);
  }

  map.stream_free.assign(map.n_stream, -1);
  map.temp_free.assign(map.n_temp, -1);
  for (int i = 0; i < map.n_stream; ++i) {
    if (s_fixed[i]) continue;
    map.stream_free[i] = static_cast<int>(map.stream_free_to_global.size());
    map.stream_free_to_global.push_back(i);
  }
  for (int i = 0; i < map.n_temp; ++i) {
    if (t_fixed[i]) continue;
    map.temp_free[i] = static_cast<int>(map.temp_free_to_global.size());
    map.temp_free_to_global.push_back(i);
  }
  return map;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(Triplets& t, const std::vector<int>& rows, const std::vector<int>& cols, const Eigen::MatrixXd& M) {
  for (int j = 0; j < M.cols(); ++j)
    for (int i = 0; i < M.rows(); ++i) t.emplace_back(rows[i], cols[j], M(i, j));
}

SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Discretization::Discretization(std::shared_ptr<const PolygonalMesh> mesh, int k, int ell, Problem problem)
    : mesh_(std::move(mesh)), problem_(std::move(problem)) {
  index_ = build_index_map(*mesh_, k, ell, problem_.bc);
  const int nc = mesh_->n_cells();
  stream_.reserve(nc);
  temp_.reserve(nc);
  forms_.reserve(nc);
  Triplets tmf, taf, tmt, tat;
  for (int c = 0; c < nc; ++c) {
    stream_.emplace_back(ElementCell::from_mesh(*mesh_, c), k);
    temp_.emplace_back(ElementCell::from_mesh(*mesh_, c), ell);
    forms_.push_back(build_cell_forms(stream_.back(), temp_.back(), problem_.stab));
    const auto& sd = index_.stream_dofs[c];
    const auto& td = index_.temp_dofs[c];
    scatter(tmf, sd, sd, forms_.back().MF);
    scatter(taf, sd, sd, forms_.back().AF);
    scatter(tmt, td, td, forms_.back().MT);
    scatter(tat, td, td, forms_.back().AT);
    for (int e : mesh_->cell_edges(c)) {
      if (mesh_->edge(e).on_boundary()) {
        boundary_cells_.push_back(c);
        break;
      }
    }
  }
  MF_ = from_triplets(index_.n_stream, index_.n_stream, tmf);
  AF_ = from_triplets(index_.n_stream, index_.n_stream, taf);
  MT_ = from_triplets(index_.n_temp, index_.n_temp, tmt);
  AT_ = from_triplets(index_.n_temp, index_.n_temp, tat);
}

const SparseMatrix& Discretization::C(double time) const {
  if (C_ready_ && (!problem_.g_time_dependent || C_time_ == time)) return C_;
  Triplets t;
  if (problem_.g) {
    for (int c = 0; c < mesh_->n_cells(); ++c) {
      scatter(t, index_.temp_dofs[c], index_.stream_dofs[c], local_C(stream_[c], temp_[c], problem_.g, time));
    }
  }
  C_ = from_triplets(index_.n_temp, index_.n_stream, t);
  C_time_ = time;
  C_ready_ = true;
  return C_;
}

Eigen::VectorXd Discretization::gather_stream(int c, const Eigen::VectorXd& psi) const {
  const auto& d = index_.stream_dofs[c];
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) v(static_cast<Eigen::Index>(i)) = psi(d[i]);
  return v;
}

Eigen::VectorXd Discretization::gather_temp(int c, const Eigen::VectorXd& theta) const {
  const auto& d = index_.temp_dofs[c];
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) v(static_cast<Eigen::Index>(i)) = theta(d[i]);
  return v;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Discretization::loads(double time) const {
  Eigen::VectorXd fs = Eigen::VectorXd::Zero(index_.n_stream);
  Eigen::VectorXd ft = Eigen::VectorXd::Zero(index_.n_temp);
  if (!problem_.f_psi && !problem_.f_theta) return {fs, ft};
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    const LocalLoads l = local_loads(stream_[c], temp_[c], problem_.f_psi, problem_.f_theta, time);
    const auto& sd = index_.stream_dofs[c];
    const auto& td = index_.temp_dofs[c];
    for (std::size_t i = 0; i < sd.size(); ++i) fs(sd[i]) += l.psi(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < td.size(); ++i) ft(td[i]) += l.theta(static_cast<Eigen::Index>(i));
  }
  return {fs, ft};
}

void Discretization::apply_boundary(Eigen::VectorXd& psi, Eigen::VectorXd& theta, double time) const {
  for (int i = 0; i < index_.n_stream; ++i)
    if (index_.stream_free[i] < 0) psi(i) = 0.0;
  for (int i = 0; i < index_.n_temp; ++i)
    if (index_.temp_free[i] < 0) theta(i) = 0.0;
  if (!problem_.psi_boundary && !problem_.theta_boundary) return;
  for (int c : boundary_cells_) {
    if (problem_.psi_boundary) {
      const Eigen::VectorXd d =
          stream_[c].interpolate([&](const Point& x) { return problem_.psi_boundary(x, time); });
      const auto& sd = index_.stream_dofs[c];
      for (std::size_t i = 0; i < sd.size(); ++i)
        if (index_.stream_free[sd[i]] < 0) psi(sd[i]) = d(static_cast<Eigen::Index>(i));
    }
    if (problem_.theta_boundary) {
      const Eigen::VectorXd d = temp_[c].interpolate([&](const Point& x) { return problem_.theta_boundary(x, time); });
      const auto& td = index_.temp_dofs[c];
      for (std::size_t i = 0; i < td.size(); ++i)
        if (index_.temp_free[td[i]] < 0) theta(td[i]) = d(static_cast<Eigen::Index>(i));
    }
  }
}

Eigen::VectorXd Discretization::interpolate_stream(const StreamFunction& f) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(index_.n_stream);
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    const Eigen::VectorXd d = stream_[c].interpolate(f);
    const auto& sd = index_.stream_dofs[c];
    for (std::size_t i = 0; i < sd.size(); ++i) v(sd[i]) = d(static_cast<Eigen::Index>(i));
  }
  return v;
}

Eigen::VectorXd Discretization::interpolate_temp(const ScalarFunction& f) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(index_.n_temp);
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    const Eigen::VectorXd d = temp_[c].interpolate(f);
    const auto& td = index_.temp_dofs[c];
    for (std::size_t i = 0; i < td.size(); ++i) v(td[i]) = d(static_cast<Eigen::Index>(i));
  }
  return v;
}

namespace {

// Solve the free block of A x = b with the constrained entries of x given.
Eigen::VectorXd solve_with_lifting(const SparseMatrix& A, const Eigen::VectorXd& b, Eigen::VectorXd x,
                                   const std::vector<int>& free, const std::vector<int>& free_to_global) {
  const int nf = static_cast<int>(free_to_global.size());
  if (nf == 0) return x;
  Eigen::VectorXd rhs = b - A * x;
  Triplets t;
  for (int col = 0; col < A.outerSize(); ++col) {
    if (free[col] < 0) continue;
    for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
      if (free[it.row()] >= 0) t.emplace_back(free[it.row()], free[col], it.value());
    }
  }
  const SparseMatrix Aff = from_triplets(nf, nf, t);
  Eigen::VectorXd rf(nf);
  for (int i = 0; i < nf; ++i) rf(i) = rhs(free_to_global[i]);
  const Eigen::VectorXd dx = linear_solve(Aff, rf);
  for (int i = 0; i < nf; ++i) x(free_to_global[i]) += dx(i);
  return x;
}

}  // namespace

SolutionState set_initial_state(const Discretization& disc, const InitialData& data, InitialMode mode) {
  const auto& idx = disc.index();
  SolutionState s;
  s.step = 0;
  s.time = 0.0;
  if (mode == InitialMode::interpolate) {
    s.psi = disc.interpolate_stream(data.psi0);
    s.theta = disc.interpolate_temp(data.theta0);
    disc.apply_boundary(s.psi, s.theta, 0.0);
    return s;
  }
  if (!data.psi0_hessian || !data.theta0_grad) {
    throw Error(ErrorCategory::config, "energy projection needs the Hessian of psi0 and the gradient of theta0");
  }
  s.psi = Eigen::VectorXd::Zero(idx.n_stream);
  s.theta = Eigen::VectorXd::Zero(idx.n_temp);
  disc.apply_boundary(s.psi, s.theta, 0.0);

  Eigen::VectorXd bs = Eigen::VectorXd::Zero(idx.n_stream);
  Eigen::VectorXd bt = Eigen::VectorXd::Zero(idx.n_temp);
  for (int c = 0; c < disc.mesh().n_cells(); ++c) {
    const auto& se = disc.stream(c);
    const auto& te = disc.temp(c);
    const auto& cell = se.cell();
    const int k = se.k();
    const int l = te.ell();
    const auto b = cell.basis(std::max(k, l));
    const auto& rule = cell.volume_rule(2 * k + 2);
    const int N = poly_dim(k);
    const int Nl = poly_dim(l);
    const int Nl1 = poly_dim(l - 1);
    Eigen::VectorXd ls = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd lv = Eigen::VectorXd::Zero(Nl);
    Eigen::VectorXd lgx = Eigen::VectorXd::Zero(Nl1);
    Eigen::VectorXd lgy = Eigen::VectorXd::Zero(Nl1);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point& x = rule.points[q];
      const double w = rule.weights[q];
      const auto H = data.psi0_hessian(x);
      const Eigen::MatrixXd Hm = b.hessians(x);
      ls += w * (H[0] * Hm.row(0).head(N) + 2.0 * H[1] * Hm.row(1).head(N) + H[2] * Hm.row(2).head(N)).transpose();
      const Eigen::VectorXd m = b.values(x);
      const Point g = data.theta0_grad(x);
      lv += w * data.theta0(x) * m.head(Nl);
      lgx += w * g.x() * m.head(Nl1);
      lgy += w * g.y() * m.head(Nl1);
    }
    const Eigen::VectorXd cs = se.projectors().PiD.transpose() * ls;
    const auto& pt = te.projectors();
    const Eigen::VectorXd ct = pt.PiL2_l.transpose() * lv + pt.PiGradX.transpose() * lgx + pt.PiGradY.transpose() * lgy;
    const auto& sd = idx.stream_dofs[c];
    const auto& td = idx.temp_dofs[c];
    for (std::size_t i = 0; i < sd.size(); ++i) bs(sd[i]) += cs(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < td.size(); ++i) bt(td[i]) += ct(static_cast<Eigen::Index>(i));
  }
  s.psi = solve_with_lifting(disc.AF(), bs, s.psi, idx.stream_free, idx.stream_free_to_global);
  const SparseMatrix A = disc.AT() + disc.MT();
  s.theta = solve_with_lifting(A, bt, s.theta, idx.temp_free, idx.temp_free_to_global);
  return s;
}

namespace {

Residual residual_with_loads(const Discretization& disc, const SolutionState& prev, const Eigen::VectorXd& psi,
                             const Eigen::VectorXd& theta, double time, double dt, const Eigen::VectorXd& fs,
                             const Eigen::VectorXd& ft) {
  const auto& p = disc.problem();
  Residual r;
  r.psi = disc.MF() * ((psi - prev.psi) / dt) + p.nu * (disc.AF() * psi) - disc.C(time).transpose() * theta - fs;
  r.theta = disc.MT() * ((theta - prev.theta) / dt) + p.kappa * (disc.AT() * theta) - ft;
  const auto& idx = disc.index();
  for (int c = 0; c < disc.mesh().n_cells(); ++c) {
    const auto& tab = disc.forms(c).tables;
    const Eigen::VectorXd lp = disc.gather_stream(c, psi);
    const Eigen::VectorXd lt = disc.gather_temp(c, theta);
    const Eigen::VectorXd bs = local_BF(tab, lp) * lp;
    const Eigen::VectorXd bt = local_Bskew(tab, lp) * lt;
    const auto& sd = idx.stream_dofs[c];
    const auto& td = idx.temp_dofs[c];
    for (std::size_t i = 0; i < sd.size(); ++i) r.psi(sd[i]) += bs(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < td.size(); ++i) r.theta(td[i]) += bt(static_cast<Eigen::Index>(i));
  }
  return r;
}

SparseMatrix linear_jacobian(const Discretization& disc, double time, double dt) {
  const auto& idx = disc.index();
  const auto& p = disc.problem();
  const int np = idx.n_psi();
  Triplets t;
  auto add_block = [&](const SparseMatrix& A, double a, const std::vector<int>& rf, const std::vector<int>& cf,
                       int roff, int coff) {
    for (int col = 0; col < A.outerSize(); ++col) {
      if (cf[col] < 0) continue;
      for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
        if (rf[it.row()] >= 0) t.emplace_back(roff + rf[it.row()], coff + cf[col], a * it.value());
      }
    }
  };
  add_block(disc.MF(), 1.0 / dt, idx.stream_free, idx.stream_free, 0, 0);
  add_block(disc.AF(), p.nu, idx.stream_free, idx.stream_free, 0, 0);
  const SparseMatrix Ct = disc.C(time).transpose();
  add_block(Ct, -1.0, idx.stream_free, idx.temp_free, 0, np);
  add_block(disc.MT(), 1.0 / dt, idx.temp_free, idx.temp_free, np, np);
  add_block(disc.AT(), p.kappa, idx.temp_free, idx.temp_free, np, np);
  return from_triplets(idx.n_free(), idx.n_free(), t);
}

SparseMatrix nonlinear_jacobian(const Discretization& disc, const Eigen::VectorXd& psi, const Eigen::VectorXd& theta) {
  const auto& idx = disc.index();
  const int np = idx.n_psi();
  Triplets t;
  for (int c = 0; c < disc.mesh().n_cells(); ++c) {
    const auto& tab = disc.forms(c).tables;
    const Eigen::VectorXd lp = disc.gather_stream(c, psi);
    const Eigen::VectorXd lt = disc.gather_temp(c, theta);
    const Eigen::MatrixXd jpp = local_BF(tab, lp) + local_BF_first(tab, lp);
    const Eigen::MatrixXd jtp = local_Bskew_dpsi(tab, lt);
    const Eigen::MatrixXd jtt = local_Bskew(tab, lp);
    const auto& sd = idx.stream_dofs[c];
    const auto& td = idx.temp_dofs[c];
    for (std::size_t j = 0; j < sd.size(); ++j) {
      const int fj = idx.stream_free[sd[j]];
      if (fj < 0) continue;
      for (std::size_t i = 0; i < sd.size(); ++i) {
        const int fi = idx.stream_free[sd[i]];
        if (fi >= 0) t.emplace_back(fi, fj, jpp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
      for (std::size_t i = 0; i < td.size(); ++i) {
        const int fi = idx.temp_free[td[i]];
        if (fi >= 0) t.emplace_back(np + fi, fj, jtp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
    for (std::size_t j = 0; j < td.size(); ++j) {
      const int fj = idx.temp_free[td[j]];
      if (fj < 0) continue;
      for (std::size_t i = 0; i < td.size(); ++i) {
        const int fi = idx.temp_free[td[i]];
        if (fi >= 0) t.emplace_back(np + fi, np + fj, jtt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
  }
  return from_triplets(idx.n_free(), idx.n_free(), t);
}

}  // namespace

Residual residual(const Discretization& disc, const SolutionState& prev, const Eigen::VectorXd& psi,
                  const Eigen::VectorXd& theta, double time, double dt) {
  const auto [fs, ft] = disc.loads(time);
  return residual_with_loads(disc, prev, psi, theta, time, dt, fs, ft);
}

SparseMatrix jacobian(const Discretization& disc, const Eigen::VectorXd& psi, const Eigen::VectorXd& theta,
                      double time, double dt) {
  return linear_jacobian(disc, time, dt) + nonlinear_jacobian(disc, psi, theta);
}

Eigen::VectorXd restrict_free(const GlobalIndexMap& map, const Residual& r) {
  Eigen::VectorXd v(map.n_free());
  for (int i = 0; i < map.n_psi(); ++i) v(i) = r.psi(map.stream_free_to_global[i]);
  for (int i = 0; i < map.n_theta(); ++i) v(map.n_psi() + i) = r.theta(map.temp_free_to_global[i]);
  return v;
}

namespace {

using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

Eigen::VectorXd checked_solve(LU& lu, const SparseMatrix& J, const Eigen::VectorXd& r) {
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCategory::singular, fmt::format("sparse factorization failed: {}", lu.lastErrorMessage()));
  }
  Eigen::VectorXd x = lu.solve(r);
  const double rn = r.norm();
  for (int it = 0; it < 3; ++it) {
    if (!x.allFinite()) break;
    const Eigen::VectorXd res = r - J * x;
    if (res.norm() <= 1e-12 * rn) break;
    x += lu.solve(res);
  }
  const double rel = rn > 0 ? (r - J * x).norm() / rn : (J * x).norm();
  if (!x.allFinite() || rel > 1e-10) {
    throw Error(ErrorCategory::singular, fmt::format("linear solve residual {:.3e}; matrix is singular", rel));
  }
  return x;
}

}  // namespace

Eigen::VectorXd linear_solve(const SparseMatrix& J, const Eigen::VectorXd& r) {
  if (J.rows() != J.cols() || J.rows() != r.size()) throw Error(ErrorCategory::domain, "linear_solve: size mismatch");
  if (J.rows() == 0) return Eigen::VectorXd();
  LU lu;
  lu.compute(J);
  return checked_solve(lu, J, r);
}

NewtonStepper::NewtonStepper(const Discretization& disc, TimeStepperConfig config)
    : disc_(disc), config_(config) {
  if (!(config_.dt > 0)) throw Error(ErrorCategory::config, "time step must be positive");
  if (!(config_.newton_tol > 0)) throw Error(ErrorCategory::config, "Newton tolerance must be positive");
}

void NewtonStepper::build_linear(double time) {
  if (Jlin_time_ >= 0 && (!disc_.problem().g_time_dependent || Jlin_time_ == time)) return;
  Jlin_ = linear_jacobian(disc_, time, config_.dt);
  Jlin_time_ = time;
}

SolutionState NewtonStepper::step(const SolutionState& prev, StepReport* report) {
  const auto& idx = disc_.index();
  const double dt = config_.dt;
  const double time = prev.time + dt;
  build_linear(time);
  SolutionState cur;
  cur.step = prev.step + 1;
  cur.time = time;
  if (prev.step == 0) {
    cur.psi = Eigen::VectorXd::Zero(prev.psi.size());
    cur.theta = Eigen::VectorXd::Zero(prev.theta.size());
  } else {
    cur.psi = prev.psi;
    cur.theta = prev.theta;
  }
  disc_.apply_boundary(cur.psi, cur.theta, time);
  const auto [fs, ft] = disc_.loads(time);

  StepReport rep;
  LU lu;
  bool analyzed = false;
  const int np = idx.n_psi();
  for (int it = 1; it <= config_.newton_max_iter; ++it) {
    const Residual r = residual_with_loads(disc_, prev, cur.psi, cur.theta, time, dt, fs, ft);
    const Eigen::VectorXd rf = restrict_free(idx, r);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(idx.n_free());
    if (idx.n_free() > 0) {
      const SparseMatrix J = Jlin_ + nonlinear_jacobian(disc_, cur.psi, cur.theta);
      if (!analyzed) {
        lu.analyzePattern(J);
        analyzed = true;
      }
      lu.factorize(J);
      delta = checked_solve(lu, J, -rf);
    }
    for (int i = 0; i < np; ++i) cur.psi(idx.stream_free_to_global[i]) += delta(i);
    for (int i = 0; i < idx.n_theta(); ++i) cur.theta(idx.temp_free_to_global[i]) += delta(np + i);
    const double inc = delta.size() > 0 ? delta.lpNorm<Eigen::Infinity>() : 0.0;
    rep.iterations = it;
    rep.last_increment = inc;
    rep.increments.push_back(inc);
    if (!std::isfinite(inc)) break;
    if (inc < config_.newton_tol) {
      const double dp = (cur.psi - prev.psi).lpNorm<Eigen::Infinity>();
      const double dtheta = (cur.theta - prev.theta).lpNorm<Eigen::Infinity>();
      rep.state_change = std::max(dp, dtheta) / dt;
      if (report != nullptr) *report = rep;
      return cur;
    }
  }
  if (report != nullptr) *report = rep;
  throw Error(ErrorCategory::convergence,
              fmt::format("Newton did not converge at t = {:.6g} after {} iterations (last increment {:.3e})", time,
                          rep.iterations, rep.last_increment));
}

SolutionState newton_solve_step(const Discretization& disc, const SolutionState& prev, const TimeStepperConfig& config,
                                StepReport* report) {
  NewtonStepper stepper(disc, config);
  return stepper.step(prev, report);
}

double discrete_energy(const Discretization& disc, const SolutionState& s) {
  return s.psi.dot(disc.MF() * s.psi) + s.theta.dot(disc.MT() * s.theta);
}

void EnergyMonitor::on_start(const Discretization& disc, const SolutionState& s) {
  energy_.clear();
  iterations_.clear();
  energy_.push_back(discrete_energy(disc, s));
}

void EnergyMonitor::on_step(const Discretization& disc, const SolutionState&, const SolutionState& cur,
                            const StepReport& report) {
  energy_.push_back(discrete_energy(disc, cur));
  iterations_.push_back(report.iterations);
}

bool EnergyMonitor::non_increasing(double rel_tol) const {
  for (std::size_t i = 1; i < energy_.size(); ++i) {
    if (energy_[i] > energy_[i - 1] * (1.0 + rel_tol) + 1e-300) return false;
  }
  return true;
}

void SteadyStateDetector::on_step(const Discretization&, const SolutionState&, const SolutionState&,
                                  const StepReport& report) {
  rate_ = report.state_change;
  if (rate_ < tol_) fired_ = true;
}

TrajectorySummary run_transient(const Discretization& disc, const SolutionState& initial,
                                const TimeStepperConfig& config, const std::vector<Observer*>& observers) {
  if (!(config.dt > 0) || config.t_final < config.dt * (1 - 1e-12)) {
    throw Error(ErrorCategory::config, "need dt > 0 and t_final >= dt");
  }
  spdlog::debug("time marching: dt = {:g}, T = {:g}, nu = {:g}, kappa = {:g}", config.dt, config.t_final,
                disc.problem().nu, disc.problem().kappa);
  NewtonStepper stepper(disc, config);
  const int n_steps = static_cast<int>(std::llround(config.t_final / config.dt));
  TrajectorySummary sum;
  SolutionState state = initial;
  for (auto* o : observers) o->on_start(disc, state);
  for (int n = 1; n <= n_steps; ++n) {
    StepReport rep;
    SolutionState next = stepper.step(state, &rep);
    for (auto* o : observers) o->on_step(disc, state, next, rep);
    state = std::move(next);
    ++sum.steps;
    sum.total_newton_iterations += rep.iterations;
    sum.max_newton_iterations = std::max(sum.max_newton_iterations, rep.iterations);
    bool stop = false;
    for (auto* o : observers) stop = stop || o->request_stop();
    if (config.steady_state_tol && rep.state_change < *config.steady_state_tol) stop = true;
    if (stop && n < n_steps) {
      sum.stopped_early = true;
      break;
    }
  }
  sum.final_state = std::move(state);
  return sum;
}

void save_checkpoint(const std::filesystem::path& path, const Discretization& disc, const SolutionState& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, fmt::format("cannot write checkpoint {}", path.string()));
  out << fmt::format("VEMB-CHECKPOINT 1\nmesh {:016x} k {} ell {} step {} time {:.17g}\n", disc.mesh().hash(),
                     disc.k(), disc.ell(), s.step, s.time);
  out << "psi " << s.psi.size() << '\n';
  for (Eigen::Index i = 0; i < s.psi.size(); ++i) out << fmt::format("{:.17g}\n", s.psi(i));
  out << "theta " << s.theta.size() << '\n';
  for (Eigen::Index i = 0; i < s.theta.size(); ++i) out << fmt::format("{:.17g}\n", s.theta(i));
  if (!out) throw Error(ErrorCategory::io, fmt::format("write failed for {}", path.string()));
}

SolutionState load_checkpoint(const std::filesystem::path& path, const Discretization& disc) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, fmt::format("cannot open checkpoint {}", path.string()));
  std::string magic;
  int version = 0;
  std::string key_mesh, key_k, key_ell, key_step, key_time, hash;
  int k = 0;
  int ell = 0;
  SolutionState s;
  if (!(in >> magic >> version) || magic != "VEMB-CHECKPOINT" || version != 1) {
    throw Error(ErrorCategory::parse, "not a checkpoint file");
  }
  if (!(in >> key_mesh >> hash >> key_k >> k >> key_ell >> ell >> key_step >> s.step >> key_time >> s.time)) {
    throw Error(ErrorCategory::parse, "bad checkpoint header");
  }
  if (hash != fmt::format("{:016x}", disc.mesh().hash()) || k != disc.k() || ell != disc.ell()) {
    throw Error(ErrorCategory::parse, "checkpoint does not match the mesh or the element degrees");
  }
  auto read_vec = [&](const char* name, Eigen::Index expected) {
    std::string key;
    Eigen::Index n = 0;
    if (!(in >> key >> n) || key != name || n != expected) throw Error(ErrorCategory::parse, "bad checkpoint vector");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(in >> v(i))) throw Error(ErrorCategory::parse, "truncated checkpoint");
    return v;
  };
  s.psi = read_vec("psi", disc.index().n_stream);
  s.theta = read_vec("theta", disc.index().n_temp);
  return s;
}

}  // namespace vemb
