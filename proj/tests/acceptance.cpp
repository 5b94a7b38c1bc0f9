// Acceptance runner: one PASS/FAIL line per criterion.
//   vemb_acceptance [--full] [--only N]
// --full runs the cavity at h = 1/64 and adds Ra = 1e6.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "support.hpp"
#include "vemb/analysis.hpp"
#include "vemb/error.hpp"
#include "vemb/experiments.hpp"
#include "vemb/forms.hpp"
#include "vemb/manufactured.hpp"
#include "vemb/solver.hpp"

using namespace vemb;
using namespace vemb::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Eigen::VectorXd random_vector(std::mt19937& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

double integrate(const ElementCell& cell, int order, auto&& f) {
  const QuadratureRule& rule = cell.volume_rule(order);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.points[i]);
  return s;
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

Outcome projector_consistency() {
  double worst = 0.0;
  int checks = 0;
  std::mt19937 rng(2024);
  for (MeshFamily f : kAllFamilies) {
    const PolygonalMesh m = generate_family(f, 4, 1);
    for (int c : sample_cells(m)) {
      const ElementCell cell = ElementCell::from_mesh(m, c);
      for (int k : {2, 3}) {
        const StreamElement se(cell, k);
        const auto& p = se.projectors();
        const DerivativeTables t = monomial_derivatives(cell.basis(k));
        for (int trial = 0; trial < 20; ++trial) {
          const CellPolynomial q{cell.basis(k), random_coeffs(rng, k)};
          const Eigen::VectorXd d = se.interpolate([&](const Point& x) { return q.sample(x); });
          const double s = q.c.norm();
          const Eigen::VectorXd dx = (t.dx * q.c).head(poly_dim(k - 1)), dy = (t.dy * q.c).head(poly_dim(k - 1));
          for (double e : {rel_err(p.PiD * d, q.c, s), rel_err(p.PiC * d, q.c, s),
                           rel_err(p.PiL2_km2 * d, l2_project(cell, q, k - 2), s),
                           rel_err(p.PiLap * d, (t.lap * q.c).head(poly_dim(k - 2)), s), rel_err(p.PiGradX * d, dx, s),
                           rel_err(p.PiGradY * d, dy, s), rel_err(p.PiCurlX * d, dy, s), rel_err(p.PiCurlY * d, -dx, s)}) {
            worst = std::max(worst, e);
            ++checks;
          }
        }
      }
      for (int l : {1, 2}) {
        const TempElement te(cell, l);
        const auto& p = te.projectors();
        const DerivativeTables t = monomial_derivatives(cell.basis(l));
        for (int trial = 0; trial < 20; ++trial) {
          const CellPolynomial q{cell.basis(l), random_coeffs(rng, l)};
          const Eigen::VectorXd d = te.interpolate([&](const Point& x) { return q.value(x); });
          const double s = q.c.norm();
          for (double e : {rel_err(p.PiNabla * d, q.c, s), rel_err(p.PiL2_l * d, q.c, s),
                           rel_err(p.PiL2_lm1 * d, l2_project(cell, q, l - 1), s),
                           rel_err(p.PiGradX * d, (t.dx * q.c).head(poly_dim(l - 1)), s),
                           rel_err(p.PiGradY * d, (t.dy * q.c).head(poly_dim(l - 1)), s)}) {
            worst = std::max(worst, e);
            ++checks;
          }
        }
      }
    }
  }
  return {worst <= 1e-11, fmt::format("{} projector checks, max relative error {:.2e}", checks, worst)};
}

Outcome form_structure() {
  std::mt19937 rng(7);
  double skew = 0.0, diag = 0.0, cons = 0.0;
  for (MeshFamily f : kAllFamilies) {
    const PolygonalMesh m = generate_family(f, 4, 1);
    for (int c : sample_cells(m)) {
      const ElementCell cell = ElementCell::from_mesh(m, c);
      for (int k : {2, 3}) {
        const StreamElement s(cell, k);
        const TempElement t(cell, k - 1);
        const CellForms forms = build_cell_forms(s, t);
        const PointTables& tab = forms.tables;
        for (int trial = 0; trial < 100; ++trial) {
          const Eigen::VectorXd zeta = random_vector(rng, s.ndof()), phi = random_vector(rng, s.ndof());
          const double scale = local_BF(tab, zeta).norm() * phi.squaredNorm();
          diag = std::max(diag, std::abs(eval_BF(tab, zeta, phi, phi)) / scale);
        }
        const Eigen::MatrixXd B = local_Bskew(tab, random_vector(rng, s.ndof()));
        skew = std::max(skew, (B + B.transpose()).cwiseAbs().maxCoeff());

        // consistency: the discrete forms reproduce the exact ones when one argument is a polynomial
        const CellPolynomial p{cell.basis(k), random_coeffs(rng, k)};
        const Eigen::VectorXd dp = s.interpolate([&](const Point& x) { return p.sample(x); });
        const Eigen::VectorXd v = random_vector(rng, s.ndof());
        const CellPolynomial pdv{cell.basis(k), s.projectors().PiD * v}, pcv{cell.basis(k), s.projectors().PiC * v};
        const double a = integrate(cell, 2 * k, [&](const Point& x) {
          const Eigen::Vector3d hp = p.basis.hessians(x) * p.c, hv = pdv.basis.hessians(x) * pdv.c;
          return hp(0) * hv(0) + 2 * hp(1) * hv(1) + hp(2) * hv(2);
        });
        const double mf = integrate(cell, 2 * k, [&](const Point& x) { return p.grad(x).dot(pcv.grad(x)); });
        cons = std::max(cons, std::abs(v.dot(forms.AF * dp) - a) / (1 + std::abs(a)) / v.norm());
        cons = std::max(cons, std::abs(v.dot(forms.MF * dp) - mf) / (1 + std::abs(mf)) / v.norm());

        const int l = t.ell();
        const CellPolynomial r{cell.basis(l), random_coeffs(rng, l)};
        const Eigen::VectorXd dr = t.interpolate([&](const Point& x) { return r.value(x); });
        const Eigen::VectorXd w = random_vector(rng, t.ndof());
        const CellPolynomial pn{cell.basis(l), t.projectors().PiNabla * w}, p0{cell.basis(l), t.projectors().PiL2_l * w};
        const double at = integrate(cell, 2 * l, [&](const Point& x) { return r.grad(x).dot(pn.grad(x)); });
        const double mt = integrate(cell, 2 * l, [&](const Point& x) { return r.value(x) * p0.value(x); });
        cons = std::max(cons, std::abs(w.dot(forms.AT * dr) - at) / (1 + std::abs(at)) / w.norm());
        cons = std::max(cons, std::abs(w.dot(forms.MT * dr) - mt) / (1 + std::abs(mt)) / w.norm());
      }
    }
  }
  const bool ok = skew == 0.0 && diag <= 1e-12 && cons <= 1e-11;
  return {ok, fmt::format("B_skew + B_skew^T max {:.1e}; |B_F(z;p,p)|/scale max {:.2e}; consistency defect max {:.2e}",
                          skew, diag, cons)};
}

Outcome dof_counts() {
  const int expected[] = {36, 196, 900, 3844};
  std::string got;
  bool ok = true;
  int i = 0;
  for (int n : {4, 8, 16, 32}) {
    const GlobalIndexMap m =
        build_index_map(generate_family(MeshFamily::quad_uniform, n), 2, 1, BoundarySpec::all_dirichlet());
    ok = ok && m.n_free() == expected[i++];
    got += fmt::format("{}{}", got.empty() ? "" : " ", m.n_free());
  }
  return {ok, "free DOFs " + got + " (expected 36 196 900 3844)"};
}

Outcome jacobian_check() {
  const SeparableSolution s = accuracy_solution();
  const auto mesh = std::make_shared<const PolygonalMesh>(generate_family(MeshFamily::triangular, 4));
  const Discretization disc(mesh, 2, 1, s.problem(1.0, 1.0));
  const auto& idx = disc.index();
  std::mt19937 rng(11);
  SolutionState prev;
  prev.psi = random_vector(rng, idx.n_stream, 0.1);
  prev.theta = random_vector(rng, idx.n_temp, 0.1);
  Eigen::VectorXd psi = random_vector(rng, idx.n_stream, 0.1), theta = random_vector(rng, idx.n_temp, 0.1);
  const double t = 0.5, dt = 0.125;
  disc.apply_boundary(psi, theta, t);
  const Eigen::VectorXd d = random_vector(rng, idx.n_free(), 100.0);
  const Eigen::VectorXd Jd = jacobian(disc, psi, theta, t, dt) * d;
  const Eigen::VectorXd r0 = restrict_free(idx, residual(disc, prev, psi, theta, t, dt));
  std::vector<double> errs;
  for (double eps : {1e-4, 1e-5, 1e-6, 1e-7}) {
    Eigen::VectorXd p1 = psi, t1 = theta;
    for (int i = 0; i < idx.n_psi(); ++i) p1(idx.stream_free_to_global[i]) += eps * d(i);
    for (int i = 0; i < idx.n_theta(); ++i) t1(idx.temp_free_to_global[i]) += eps * d(idx.n_psi() + i);
    const Eigen::VectorXd r1 = restrict_free(idx, residual(disc, prev, p1, t1, t, dt));
    errs.push_back(((r1 - r0) / eps - Jd).norm() / Jd.norm());
  }
  bool ok = true;
  std::string slopes;
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double slope = std::log10(errs[i] / errs[i + 1]);
    ok = ok && in_range(slope, 0.9, 1.1);
    slopes += fmt::format(" {:.3f}", slope);
  }
  return {ok, fmt::format("relative FD defect {:.2e} .. {:.2e}; log10 ratios per decade of eps:{}", errs.front(),
                          errs.back(), slopes)};
}

Outcome energy_stability() {
  bool ok = true;
  std::string detail;
  for (int mult : {1, 10}) {
    ExperimentConfig c;
    c.experiment = Experiment::custom;
    c.mesh = MeshFamily::voronoi;
    c.n = 8;
    c.dt = mult * (1.0 / c.n);
    c.t_final = 10 * c.dt;
    const DecayReport r = run_custom(c);
    ok = ok && r.non_increasing && r.energy.size() == 11;
    detail += fmt::format("{}dt={:g}: energy {:.4e} -> {:.4e} over {} steps, monotone={}", detail.empty() ? "" : "; ",
                          c.dt, r.energy.front(), r.energy.back(), r.energy.size() - 1, r.non_increasing);
  }
  return {ok, detail};
}

Outcome convergence_rates_check() {
  bool ok = true;
  std::string detail;
  const SeparableSolution exact = accuracy_solution();
  const int levels[] = {4, 8, 16, 32};
  for (MeshFamily f : {MeshFamily::triangular, MeshFamily::quad_uniform}) {
    for (bool quadratic : {false, true}) {
      std::vector<ErrorRow> rows;
      for (int n : levels) {
        ManufacturedRun run;
        run.family = f;
        run.n = n;
        run.dt = quadratic ? 1.0 / (n * n) : 1.0 / n;
        rows.push_back(run_manufactured(exact, run));
      }
      auto rates = [&](auto field) {
        std::vector<std::pair<double, double>> he;
        for (const auto& r : rows) he.emplace_back(r.h, r.*field);
        return convergence_rates(he);
      };
      const auto report = [&](const char* name, auto field, double lo, double hi) {
        std::string s = fmt::format(" {}", name);
        for (const auto& r : rates(field)) {
          const bool good = r && in_range(*r, lo, hi);
          ok = ok && good;
          s += r ? fmt::format(" {:.2f}{}", *r, good ? "" : "!") : " n/a!";
        }
        return s;
      };
      std::string line = fmt::format("\n    {} {}:", to_string(f), quadratic ? "dt=h^2" : "dt=h");
      if (quadratic) {
        line += report("psi_LinfH1", &ErrorRow::psi_LinfH1, 1.7, 2.3);
        line += report("theta_LinfL2", &ErrorRow::theta_LinfL2, 1.7, 2.3);
      } else {
        line += report("psi_L2H2", &ErrorRow::psi_L2H2, 0.85, 1.15);
        line += report("theta_L2H1", &ErrorRow::theta_L2H1, 0.85, 1.15);
        if (f == MeshFamily::quad_uniform) {
          // reference magnitudes at h = dt = 1/8 on the distorted quadrilateral family
          const ErrorRow& r8 = rows[1];
          const double ref_psi = 8.42107e-3, ref_theta = 7.88174e-3;
          const bool mag = in_range(r8.psi_L2H2 / ref_psi, 1.0 / 3, 3.0) && in_range(r8.theta_L2H1 / ref_theta, 1.0 / 3, 3.0);
          ok = ok && mag;
          line += fmt::format(" | h=1/8 magnitudes {:.3e} (ref {:.3e}), {:.3e} (ref {:.3e}){}", r8.psi_L2H2, ref_psi,
                              r8.theta_L2H1, ref_theta, mag ? "" : "!");
        }
      }
      detail += line;
    }
  }
  return {ok, "rates by level pair (! marks out of range):" + detail};
}

Outcome cavity_benchmark(bool full) {
  struct Case {
    double ra, u2_ref, u1_ref, tol;
  };
  std::vector<Case> cases{{1e4, 19.56, 16.15, 0.05}, {1e5, 68.46, 34.80, 0.06}};
  if (full) cases.push_back({1e6, 216.37, 65.91, 0.08});
  bool ok = true;
  std::string detail = full ? "h=1/64" : "h=1/32 (Ra=1e6 only with --full)";
  for (const Case& cs : cases) {
    ExperimentConfig c;
    c.experiment = Experiment::cavity;
    c.mesh = MeshFamily::quad_uniform;
    c.n = full ? 64 : 32;
    c.ra = cs.ra;
    c.dt = 1e-3;
    c.t_final = 1.0;
    c.steady = !full;
    const CavityReport r = run_cavity(c);
    const double e2 = std::abs(r.u2_horizontal.max_abs - cs.u2_ref) / cs.u2_ref;
    const double e1 = std::abs(r.u1_vertical.max_abs - cs.u1_ref) / cs.u1_ref;
    const bool good = e2 <= cs.tol && e1 <= cs.tol;
    ok = ok && good;
    detail += fmt::format("\n    Ra={:g}: max|u2| on y=0.5 {:.3f} (ref {:.2f}, {:+.1f}%), max|u1| on x=0.5 {:.3f} "
                          "(ref {:.2f}, {:+.1f}%), tol {:.0f}%, {} steps{}",
                          cs.ra, r.u2_horizontal.max_abs, cs.u2_ref,
                          100 * (r.u2_horizontal.max_abs - cs.u2_ref) / cs.u2_ref, r.u1_vertical.max_abs, cs.u1_ref,
                          100 * (r.u1_vertical.max_abs - cs.u1_ref) / cs.u1_ref, 100 * cs.tol, r.steps,
                          good ? "" : " !");
  }
  return {ok, detail};
}

Outcome small_viscosity() {
  ExperimentConfig c;
  c.experiment = Experiment::small_viscosity;
  c.mesh = MeshFamily::triangular;
  c.levels = {16};
  c.dt_list = {1.0 / 16};
  c.nu_list = {1.0, 1e-1, 1e-2, 1e-3};
  const auto rows = run_small_viscosity(c);
  bool ok = rows.size() == 4;
  double lo = INFINITY, hi = 0.0;
  std::string detail;
  for (const auto& r : rows) {
    ok = ok && r.converged;
    if (r.converged) {
      lo = std::min(lo, r.errors.psi_L2H2);
      hi = std::max(hi, r.errors.psi_L2H2);
    }
    detail += fmt::format("nu={:g}: {} E(psi,L2,H2)={:.3e} E(psi,Linf,H1)={:.3e} E(theta,L2,H1)={:.3e}; ", r.nu,
                          r.converged ? "ok" : "FAILED", r.errors.psi_L2H2, r.errors.psi_LinfH1, r.errors.theta_L2H1);
  }
  const double growth = hi / lo;
  ok = ok && growth < 100.0;
  return {ok, detail + fmt::format("stream error spread {:.2f}x", growth)};
}

}  // namespace

int main(int argc, char** argv) {
  bool full = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--full") == 0) full = true;
    else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    else {
      fmt::print(stderr, "usage: vemb_acceptance [--full] [--only N]\n");
      return 2;
    }
  }
  spdlog::set_level(spdlog::level::warn);
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"projector consistency", projector_consistency},
      {"discrete form structure", form_structure},
      {"DOF-count oracle", dof_counts},
      {"Jacobian finite-difference check", jacobian_check},
      {"energy stability", energy_stability},
      {"convergence rates", convergence_rates_check},
      {"cavity benchmark", [full] { return cavity_benchmark(full); }},
      {"small-viscosity robustness", small_viscosity},
  };
  int failed = 0;
  for (int i = 0; i < 8; ++i) {
    if (only != 0 && only != i + 1) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("{} {}. {} [{:.1f}s]: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs, o.detail);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
