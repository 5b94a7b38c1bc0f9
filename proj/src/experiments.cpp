#include "vemb/experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "vemb/error.hpp"

namespace vemb {

namespace {

std::string num(double x) { return std::isfinite(x) ? fmt::format("{:.10e}", x) : std::string("nan"); }
std::string num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, fmt::format("cannot write {}", path.string()));
  return out;
}

void write_profile(const std::filesystem::path& path, const Profile& p, std::string_view column) {
  auto out = open_out(path);
  out << "s," << column << '\n';
  for (std::size_t i = 0; i < p.s.size(); ++i) out << num(p.s[i]) << ',' << num(p.value[i]) << '\n';
}

TimeStepperConfig stepper_config(double dt, double t_final, double tol, int max_iter) {
  TimeStepperConfig c;
  c.dt = dt;
  c.t_final = t_final;
  c.newton_tol = tol;
  c.newton_max_iter = max_iter;
  return c;
}

}  // namespace

ErrorRow run_manufactured(const SeparableSolution& exact, const ManufacturedRun& run) {
  auto mesh = std::make_shared<const PolygonalMesh>(generate_family(run.family, run.n, run.seed));
  const Discretization disc(mesh, run.k, run.ell, exact.problem(run.nu, run.kappa));
  const TimeStepperConfig cfg = stepper_config(run.dt, run.t_final, run.newton_tol, run.newton_max_iter);
  SolutionState state = set_initial_state(disc, exact.initial(), run.initial);
  NewtonStepper stepper(disc, cfg);
  ErrorAccumulator acc;
  ErrorRow row;
  row.n = run.n;
  row.h = 1.0 / run.n;
  row.dt = run.dt;
  row.free_dofs = disc.index().n_free();
  const auto steps = std::llround(run.t_final / run.dt);
  for (long long s = 0; s < steps; ++s) {
    StepReport rep;
    state = stepper.step(state, &rep);
    row.max_newton_iterations = std::max(row.max_newton_iterations, rep.iterations);
    acc.add(run.dt, error_step(disc, state, exact.at(state.time)));
  }
  row.psi_L2H2 = acc.psi_L2H2();
  row.theta_L2H1 = acc.theta_L2H1();
  row.psi_LinfH1 = acc.psi_LinfH1();
  row.theta_LinfL2 = acc.theta_LinfL2();
  return row;
}

namespace {

ManufacturedRun base_run(const ExperimentConfig& c) {
  ManufacturedRun r;
  r.family = c.mesh;
  r.seed = c.seed;
  r.k = c.k;
  r.ell = c.ell;
  r.nu = c.nu;
  r.kappa = c.kappa;
  r.t_final = c.t_final;
  r.newton_tol = c.newton_tol;
  r.newton_max_iter = c.newton_max_iter;
  r.initial = c.initial;
  return r;
}

std::array<std::optional<double>, 4> rates_between(const ErrorRow& a, const ErrorRow& b) {
  auto rate = [&](double ea, double eb) {
    return convergence_rates({{a.h, ea}, {b.h, eb}}).front();
  };
  return {rate(a.psi_L2H2, b.psi_L2H2), rate(a.theta_L2H1, b.theta_L2H1), rate(a.psi_LinfH1, b.psi_LinfH1),
          rate(a.theta_LinfL2, b.theta_LinfL2)};
}

}  // namespace

AccuracyReport run_accuracy(const ExperimentConfig& c) {
  validate(c);
  const SeparableSolution exact = accuracy_solution();
  AccuracyReport rep;
  std::vector<std::vector<double>> groups;
  if (c.schedule == Schedule::table) {
    for (int m : c.levels) groups.push_back(std::vector<double>(c.levels.size(), 1.0 / m));
  } else {
    std::vector<double> dts;
    for (int n : c.levels) dts.push_back(c.schedule == Schedule::diagonal ? 1.0 / n : 1.0 / (double(n) * n));
    groups.push_back(dts);
  }
  for (const auto& dts : groups) {
    for (std::size_t i = 0; i < c.levels.size(); ++i) {
      ManufacturedRun r = base_run(c);
      r.n = c.levels[i];
      r.dt = dts[i];
      const ErrorRow row = run_manufactured(exact, r);
      spdlog::info("accuracy {} n={} dt={:.6g}: E(psi,L2,H2)={:.5e} E(theta,L2,H1)={:.5e}", to_string(c.mesh), row.n,
                   row.dt, row.psi_L2H2, row.theta_L2H1);
      rep.rates.push_back(i == 0 ? std::array<std::optional<double>, 4>{} : rates_between(rep.rows.back(), row));
      rep.rows.push_back(row);
    }
  }
  return rep;
}

std::vector<ViscosityRow> run_small_viscosity(const ExperimentConfig& c) {
  validate(c);
  const SeparableSolution exact = small_viscosity_solution();
  std::vector<ViscosityRow> rows;
  for (double nu : c.nu_list) {
    for (double dt : c.dt_list) {
      for (int n : c.levels) {
        ManufacturedRun r = base_run(c);
        r.nu = nu;
        r.n = n;
        r.dt = dt;
        ViscosityRow row;
        row.nu = nu;
        try {
          row.errors = run_manufactured(exact, r);
        } catch (const Error& e) {
          if (e.category() != ErrorCategory::convergence && e.category() != ErrorCategory::singular) throw;
          row.converged = false;
          row.failure = e.what();
          row.errors.n = n;
          row.errors.h = 1.0 / n;
          row.errors.dt = dt;
          const double nan = std::numeric_limits<double>::quiet_NaN();
          row.errors.psi_L2H2 = row.errors.theta_L2H1 = row.errors.psi_LinfH1 = row.errors.theta_LinfL2 = nan;
          spdlog::warn("small viscosity nu={:g} n={} dt={:g}: {}", nu, n, dt, e.what());
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

Problem cavity_problem(double pr, double ra) {
  Problem p;
  p.nu = pr;
  p.kappa = 1.0;
  const Point g(0.0, pr * ra);
  p.g = [g](const Point&, double) { return g; };
  p.bc = BoundarySpec::cavity();
  p.theta_boundary = [](const Point& x, double) { return x.x() < 0.5 ? 1.0 : 0.0; };
  return p;
}

InitialData cavity_initial() {
  InitialData d;
  d.psi0 = [](const Point& x) { return StreamSample{-x.x() + x.y(), Point(-1.0, 1.0)}; };
  d.psi0_hessian = [](const Point&) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
  d.theta0 = [](const Point&) { return 1.0; };
  d.theta0_grad = [](const Point&) { return Point(0.0, 0.0); };
  return d;
}

PolygonalMesh config_mesh(const ExperimentConfig& c) {
  if (c.mesh_file) return load_mesh(*c.mesh_file);
  return generate_family(c.mesh, c.n, c.seed);
}

CavityReport run_cavity(const ExperimentConfig& c) {
  validate(c);
  auto mesh = std::make_shared<const PolygonalMesh>(config_mesh(c));
  const Discretization disc(mesh, c.k, c.ell, cavity_problem(*c.pr, *c.ra));
  TimeStepperConfig cfg = stepper_config(c.dt, c.t_final, c.newton_tol, c.newton_max_iter);
  if (c.steady) cfg.steady_state_tol = c.steady_tol;
  const SolutionState init = set_initial_state(disc, cavity_initial(), c.initial);
  const TrajectorySummary sum = run_transient(disc, init, cfg, {});
  CavityReport r;
  r.ra = *c.ra;
  r.steps = sum.steps;
  r.time = sum.final_state.time;
  r.stopped_early = sum.stopped_early;
  r.total_newton_iterations = sum.total_newton_iterations;
  r.state = sum.final_state;
  r.u2_horizontal = velocity_profile(disc, r.state, Midline::horizontal, VelocityComponent::u2, c.samples);
  r.u1_vertical = velocity_profile(disc, r.state, Midline::vertical, VelocityComponent::u1, c.samples);
  r.nusselt_left = nusselt_local(disc, r.state, Wall::left, c.samples);
  r.nusselt_right = nusselt_local(disc, r.state, Wall::right, c.samples);
  spdlog::info("cavity Ra={:g}: {} steps to t={:.6g}; max|u2| on y=0.5 = {:.4f}, max|u1| on x=0.5 = {:.4f}", r.ra,
               r.steps, r.time, r.u2_horizontal.max_abs, r.u1_vertical.max_abs);
  return r;
}

namespace {

SeparableSolution decay_data() {
  // psi0 = 256 (x(1-x) y(1-y))^2, theta0 = sin(pi x) sin(pi y)
  SeparableSolution s = accuracy_solution();
  s.T = [](double) { return 256.0; };
  s.dT = [](double) { return 0.0; };
  return s;
}

}  // namespace

DecayReport run_custom(const ExperimentConfig& c) {
  validate(c);
  using std::numbers::pi;
  auto mesh = std::make_shared<const PolygonalMesh>(config_mesh(c));
  Problem p;
  p.nu = c.nu;
  p.kappa = c.kappa;
  const Discretization disc(mesh, c.k, c.ell, p);
  const SeparableSolution s = decay_data();
  InitialData d = s.initial();
  d.theta0 = [](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  d.theta0_grad = [](const Point& x) -> Point {
    return pi * Point(std::cos(pi * x.x()) * std::sin(pi * x.y()), std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  const SolutionState init = set_initial_state(disc, d, c.initial);
  EnergyMonitor energy;
  const TrajectorySummary sum = run_transient(disc, init, stepper_config(c.dt, c.t_final, c.newton_tol, c.newton_max_iter),
                                              {&energy});
  DecayReport r;
  r.energy = energy.energies();
  r.newton_iterations = energy.iterations();
  r.non_increasing = energy.non_increasing();
  spdlog::info("decay run: {} steps, energy {:.6e} -> {:.6e}", sum.steps, r.energy.front(), r.energy.back());
  return r;
}

void export_fields(const Discretization& disc, const SolutionState& state, const std::filesystem::path& path) {
  const auto& mesh = disc.mesh();
  const int nv = mesh.n_vertices();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nv, 4);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(nv);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& se = disc.stream(c);
    const auto& te = disc.temp(c);
    const Eigen::VectorXd ds = disc.gather_stream(c, state.psi);
    const Eigen::VectorXd dt = disc.gather_temp(c, state.theta);
    const Eigen::VectorXd ps = se.projectors().PiD * ds;
    const Eigen::VectorXd gx = se.projectors().PiGradX * ds;
    const Eigen::VectorXd gy = se.projectors().PiGradY * ds;
    const Eigen::VectorXd pt = te.projectors().PiNabla * dt;
    const auto bk = se.cell().basis(se.k());
    const auto bk1 = se.cell().basis(se.k() - 1);
    const auto bl = te.cell().basis(te.ell());
    for (int v : mesh.cell(c)) {
      const Point& x = mesh.vertex(v);
      const Eigen::VectorXd m1 = bk1.values(x);
      acc(v, 0) += bk.values(x).dot(ps);
      acc(v, 1) += bl.values(x).dot(pt);
      acc(v, 2) += m1.dot(gy);
      acc(v, 3) -= m1.dot(gx);
      ++count(v);
    }
  }
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << fmt::format("vemb fields t={:.17g}\n", state.time);
  out << "ASCII\nDATASET POLYDATA\n";
  out << fmt::format("POINTS {} double\n", nv);
  for (int v = 0; v < nv; ++v) out << fmt::format("{:.17g} {:.17g} 0\n", mesh.vertex(v).x(), mesh.vertex(v).y());
  std::size_t size = 0;
  for (const auto& cell : mesh.cells()) size += cell.size() + 1;
  out << fmt::format("POLYGONS {} {}\n", mesh.n_cells(), size);
  for (const auto& cell : mesh.cells()) {
    out << cell.size();
    for (int v : cell) out << ' ' << v;
    out << '\n';
  }
  out << fmt::format("POINT_DATA {}\n", nv);
  const char* names[4] = {"psi", "theta", "u1", "u2"};
  for (int f = 0; f < 4; ++f) {
    out << fmt::format("SCALARS {} double 1\nLOOKUP_TABLE default\n", names[f]);
    for (int v = 0; v < nv; ++v) out << fmt::format("{:.17g}\n", count(v) > 0 ? acc(v, f) / count(v) : 0.0);
  }
  if (!out) throw Error(ErrorCategory::io, fmt::format("write failed for {}", path.string()));
}

namespace {

void write_errors_header(std::ofstream& out) {
  out << "h,dt,E_psi_L2H2,E_theta_L2H1,E_psi_LinfH1,E_theta_LinfL2,rate_psi_L2H2,rate_theta_L2H1,rate_psi_LinfH1,"
         "rate_theta_LinfL2\n";
}

}  // namespace

void run_experiment(const ExperimentConfig& c) {
  validate(c);
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw Error(ErrorCategory::io, fmt::format("cannot create {}: {}", c.out.string(), ec.message()));
  {
    auto out = open_out(c.out / "config.txt");
    out << format_config(c);
  }
  switch (c.experiment) {
    case Experiment::accuracy: {
      const AccuracyReport rep = run_accuracy(c);
      auto out = open_out(c.out / "convergence.csv");
      write_errors_header(out);
      for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        const auto& q = rep.rates[i];
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", num(r.h), num(r.dt), num(r.psi_L2H2), num(r.theta_L2H1),
                           num(r.psi_LinfH1), num(r.theta_LinfL2), num(q[0]), num(q[1]), num(q[2]), num(q[3]));
      }
      break;
    }
    case Experiment::small_viscosity: {
      const auto rows = run_small_viscosity(c);
      auto out = open_out(c.out / "viscosity.csv");
      out << "nu,h,dt,E_psi_L2H2,E_theta_L2H1,E_psi_LinfH1,E_theta_LinfL2,status\n";
      for (const auto& r : rows) {
        const auto& e = r.errors;
        out << fmt::format("{},{},{},{},{},{},{},{}\n", num(r.nu), num(e.h), num(e.dt), num(e.psi_L2H2),
                           num(e.theta_L2H1), num(e.psi_LinfH1), num(e.theta_LinfL2),
                           r.converged ? "ok" : "newton_failure");
      }
      break;
    }
    case Experiment::cavity: {
      const CavityReport r = run_cavity(c);
      {
        auto out = open_out(c.out / "summary.csv");
        out << "ra,steps,time,stopped_early,max_u2_y05,x_at_max,max_u1_x05,y_at_max\n";
        out << fmt::format("{},{},{},{},{},{},{},{}\n", num(r.ra), r.steps, num(r.time), r.stopped_early ? 1 : 0,
                           num(r.u2_horizontal.max_abs), num(r.u2_horizontal.argmax), num(r.u1_vertical.max_abs),
                           num(r.u1_vertical.argmax));
      }
      write_profile(c.out / "profile_u2_y05.csv", r.u2_horizontal, "value");
      write_profile(c.out / "profile_u1_x05.csv", r.u1_vertical, "value");
      write_profile(c.out / "nusselt_left.csv", r.nusselt_left, "Nu");
      write_profile(c.out / "nusselt_right.csv", r.nusselt_right, "Nu");
      auto mesh = std::make_shared<const PolygonalMesh>(config_mesh(c));
      const Discretization disc(mesh, c.k, c.ell, cavity_problem(*c.pr, *c.ra));
      save_checkpoint(c.out / "checkpoint.txt", disc, r.state);
      if (c.vtk) export_fields(disc, r.state, c.out / "fields.vtk");
      break;
    }
    case Experiment::custom: {
      const DecayReport r = run_custom(c);
      auto out = open_out(c.out / "energy.csv");
      out << "step,time,energy,newton_iterations\n";
      for (std::size_t i = 0; i < r.energy.size(); ++i) {
        out << fmt::format("{},{},{},{}\n", i, num(static_cast<double>(i) * c.dt), num(r.energy[i]),
                           i == 0 ? 0 : r.newton_iterations[i - 1]);
      }
      break;
    }
  }
}

}  // namespace vemb
