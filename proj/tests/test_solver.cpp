#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "vemb/analysis.hpp"
#include "vemb/error.hpp"
#include "vemb/manufactured.hpp"
#include "vemb/solver.hpp"

using namespace vemb;

namespace {

std::shared_ptr<const PolygonalMesh> mesh_of(MeshFamily f, int n, std::uint64_t seed = 0) {
  return std::make_shared<const PolygonalMesh>(generate_family(f, n, seed));
}

Eigen::VectorXd random_vector(std::mt19937& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

ErrorCategory category_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "no vemb::Error thrown";
  return ErrorCategory::domain;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vemb_test_" + name);
}

}  // namespace

TEST(IndexMap, FreeDofOracleOnUniformGrids) {
  for (int n : {4, 8, 16, 32}) {
    const GlobalIndexMap m = build_index_map(generate_family(MeshFamily::quad_uniform, n), 2, 1, BoundarySpec::all_dirichlet());
    // 3 stream DOFs and 1 temperature DOF per interior vertex
    EXPECT_EQ(m.n_free(), 4 * (n - 1) * (n - 1)) << n;
    EXPECT_EQ(m.n_psi(), 3 * (n - 1) * (n - 1));
  }
}

TEST(IndexMap, HigherDegreeCounts) {
  const PolygonalMesh mesh = generate_family(MeshFamily::triangular, 4);
  int interior_edges = 0, interior_vertices = 0;
  for (int e = 0; e < mesh.n_edges(); ++e) interior_edges += mesh.edge(e).on_boundary() ? 0 : 1;
  for (int v = 0; v < mesh.n_vertices(); ++v) interior_vertices += mesh.is_boundary_vertex(v) ? 0 : 1;
  const GlobalIndexMap m = build_index_map(mesh, 3, 2, BoundarySpec::all_dirichlet());
  // k=3: one normal moment per edge; l=2: one edge moment and one interior moment
  EXPECT_EQ(m.n_psi(), 3 * interior_vertices + interior_edges);
  EXPECT_EQ(m.n_theta(), interior_vertices + interior_edges + mesh.n_cells());
  EXPECT_EQ(m.n_stream, 3 * mesh.n_vertices() + mesh.n_edges());
}

TEST(IndexMap, CavityBoundaryLeavesInsulatedWallsFree) {
  const int n = 4;
  const GlobalIndexMap m = build_index_map(generate_family(MeshFamily::quad_uniform, n), 2, 1, BoundarySpec::cavity());
  // temperature: all vertices except the two vertical walls
  EXPECT_EQ(m.n_theta(), (n + 1) * (n - 1));
  EXPECT_EQ(m.n_corner_conflicts, 4);
}

TEST(Discretization, InterpolationIsConsistentAcrossCells) {
  using std::numbers::pi;
  for (MeshFamily f : {MeshFamily::voronoi, MeshFamily::concave_rhombic}) {
    for (int k : {2, 3}) {
      Problem p;
      const Discretization disc(mesh_of(f, 4, 1), k, 2, p);
      const StreamFunction s = [](const Point& x) {
        return StreamSample{std::sin(pi * x.x()) * std::cos(2 * x.y()),
                            Point(pi * std::cos(pi * x.x()) * std::cos(2 * x.y()),
                                  -2 * std::sin(pi * x.x()) * std::sin(2 * x.y()))};
      };
      const ScalarFunction t = [](const Point& x) { return std::exp(x.x() - x.y()); };
      const Eigen::VectorXd gs = disc.interpolate_stream(s);
      const Eigen::VectorXd gt = disc.interpolate_temp(t);
      for (int c = 0; c < disc.mesh().n_cells(); ++c) {
        EXPECT_LE((disc.gather_stream(c, gs) - disc.stream(c).interpolate(s)).norm(), 1e-13);
        EXPECT_LE((disc.gather_temp(c, gt) - disc.temp(c).interpolate(t)).norm(), 1e-13);
      }
    }
  }
}

TEST(Discretization, GlobalBlocksAnnihilateExpectedKernels) {
  Problem p;
  const Discretization disc(mesh_of(MeshFamily::voronoi, 5, 3), 2, 1, p);
  const Eigen::VectorXd lin =
      disc.interpolate_stream([](const Point& x) { return StreamSample{2 * x.x() + x.y(), Point(2, 1)}; });
  EXPECT_LE((disc.AF() * lin).norm(), 1e-9);
  EXPECT_LE((disc.AT() * Eigen::VectorXd::Ones(disc.index().n_temp)).norm(), 1e-11);
  // total mass of the constant temperature equals the area
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(disc.index().n_temp);
  EXPECT_NEAR(one.dot(disc.MT() * one), 1.0, 1e-12);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const SeparableSolution s = accuracy_solution();
  const Discretization disc(mesh_of(MeshFamily::triangular, 4), 2, 1, s.problem(1.0, 1.0));
  const auto& idx = disc.index();
  std::mt19937 rng(42);
  SolutionState prev;
  prev.psi = random_vector(rng, idx.n_stream, 0.1);
  prev.theta = random_vector(rng, idx.n_temp, 0.1);
  Eigen::VectorXd psi = random_vector(rng, idx.n_stream, 0.1), theta = random_vector(rng, idx.n_temp, 0.1);
  disc.apply_boundary(psi, theta, 0.5);
  const double t = 0.5, dt = 0.1;
  const SparseMatrix J = jacobian(disc, psi, theta, t, dt);
  // a large direction keeps the truncation error well above round-off at eps = 1e-7
  const Eigen::VectorXd d = random_vector(rng, idx.n_free(), 100.0);
  const Eigen::VectorXd Jd = J * d;
  const Eigen::VectorXd r0 = restrict_free(idx, residual(disc, prev, psi, theta, t, dt));
  std::vector<double> errs;
  for (double eps : {1e-4, 1e-5, 1e-6, 1e-7}) {
    Eigen::VectorXd p1 = psi, t1 = theta;
    for (int i = 0; i < idx.n_psi(); ++i) p1(idx.stream_free_to_global[i]) += eps * d(i);
    for (int i = 0; i < idx.n_theta(); ++i) t1(idx.temp_free_to_global[i]) += eps * d(idx.n_psi() + i);
    const Eigen::VectorXd r1 = restrict_free(idx, residual(disc, prev, p1, t1, t, dt));
    errs.push_back(((r1 - r0) / eps - Jd).norm() / Jd.norm());
  }
  // the residual is quadratic, so the forward-difference error is exactly linear in eps
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    EXPECT_NEAR(std::log10(errs[i] / errs[i + 1]), 1.0, 0.1) << errs[i] << " " << errs[i + 1];
  }
  EXPECT_LT(errs.back(), 1e-5);
}

TEST(LinearSolve, SingularAndMismatch) {
  SparseMatrix A(2, 2);
  A.insert(0, 0) = 1.0;
  A.insert(1, 0) = 1.0;
  A.makeCompressed();
  EXPECT_EQ(category_of([&] { linear_solve(A, Eigen::VectorXd::Ones(2)); }), ErrorCategory::singular);
  EXPECT_EQ(category_of([&] { linear_solve(A, Eigen::VectorXd::Ones(3)); }), ErrorCategory::domain);
  SparseMatrix I(3, 3);
  I.setIdentity();
  EXPECT_LE((linear_solve(I, Eigen::Vector3d(1, 2, 3)) - Eigen::Vector3d(1, 2, 3)).norm(), 1e-15);
}

TEST(Newton, StationaryProblemIsStepIndependent) {
  // frozen-time exact solution: the discrete steady solution does not depend on dt
  const SeparableSolution s = stationary_solution();
  const Discretization disc(mesh_of(MeshFamily::quad_uniform, 4), 2, 1, s.problem(1.0, 1.0));
  std::vector<double> errs;
  for (double dt : {0.25, 0.5}) {
    TimeStepperConfig cfg;
    cfg.dt = dt;
    cfg.t_final = 20.0;
    cfg.newton_tol = 1e-12;
    cfg.steady_state_tol = 1e-10;
    SteadyStateDetector det(1e-10);
    const SolutionState init = set_initial_state(disc, s.initial(), InitialMode::interpolate);
    const TrajectorySummary sum = run_transient(disc, init, cfg, {&det});
    EXPECT_TRUE(sum.stopped_early);
    errs.push_back(error_step(disc, sum.final_state, s.at(1.0)).psi_H2);
  }
  EXPECT_NEAR(errs[0], errs[1], 1e-8 * errs[0]);
}

TEST(Newton, ConvergesQuadraticallyAndReportsFailure) {
  const SeparableSolution s = accuracy_solution();
  const Discretization disc(mesh_of(MeshFamily::triangular, 4), 2, 1, s.problem(1.0, 1.0));
  const SolutionState init = set_initial_state(disc, s.initial(), InitialMode::interpolate);
  TimeStepperConfig cfg;
  cfg.dt = 0.25;
  cfg.newton_tol = 1e-12;
  NewtonStepper stepper(disc, cfg);
  StepReport rep;
  SolutionState st = stepper.step(init, &rep);
  EXPECT_EQ(st.step, 1);
  EXPECT_DOUBLE_EQ(st.time, 0.25);
  EXPECT_LE(rep.iterations, 8);
  ASSERT_GE(rep.increments.size(), 3u);
  const auto& inc = rep.increments;
  // quadratic regime: the log-increment roughly doubles
  const std::size_t i = inc.size() - 2;
  if (inc[i] < 1e-3 && inc[i + 1] > 1e-15) EXPECT_GT(std::log(inc[i + 1]) / std::log(inc[i]), 1.6);

  cfg.newton_max_iter = 1;
  NewtonStepper one(disc, cfg);
  EXPECT_EQ(category_of([&] { one.step(init); }), ErrorCategory::convergence);
  cfg.dt = -1.0;
  EXPECT_EQ(category_of([&] { NewtonStepper bad(disc, cfg); }), ErrorCategory::config);
}

TEST(Energy, DecaysWithoutForcing) {
  Problem p;  // f = g = 0, homogeneous boundary data
  const Discretization disc(mesh_of(MeshFamily::voronoi, 6, 2), 2, 1, p);
  InitialData d;
  d.psi0 = [](const Point& x) {
    const double X = x.x() * x.x() * (1 - x.x()) * (1 - x.x()), Y = x.y() * x.y() * (1 - x.y()) * (1 - x.y());
    const double dX = 2 * x.x() * (1 - x.x()) * (1 - 2 * x.x()), dY = 2 * x.y() * (1 - x.y()) * (1 - 2 * x.y());
    return StreamSample{100 * X * Y, Point(100 * dX * Y, 100 * X * dY)};
  };
  d.theta0 = [](const Point& x) { return std::sin(3 * x.x()) * x.y() * (1 - x.y()); };
  const SolutionState init = set_initial_state(disc, d, InitialMode::interpolate);
  for (double dt : {0.02, 0.5}) {
    TimeStepperConfig cfg;
    cfg.dt = dt;
    cfg.t_final = 8 * dt;
    EnergyMonitor mon;
    run_transient(disc, init, cfg, {&mon});
    ASSERT_EQ(mon.energies().size(), 9u);
    EXPECT_GT(mon.energies().front(), 0.0);
    EXPECT_TRUE(mon.non_increasing());
    EXPECT_LT(mon.energies().back(), mon.energies().front());
    EXPECT_EQ(mon.iterations().size(), 8u);
  }
}

TEST(Checkpoint, RoundTripAndMismatch) {
  const SeparableSolution s = accuracy_solution();
  const auto mesh = mesh_of(MeshFamily::voronoi, 4, 9);
  const Discretization disc(mesh, 2, 1, s.problem(1.0, 1.0));
  std::mt19937 rng(3);
  SolutionState st;
  st.psi = random_vector(rng, disc.index().n_stream);
  st.theta = random_vector(rng, disc.index().n_temp);
  st.step = 17;
  st.time = 0.1 * 17;
  const auto path = temp_path("ckpt.txt");
  save_checkpoint(path, disc, st);
  const SolutionState back = load_checkpoint(path, disc);
  EXPECT_EQ(back.step, 17);
  EXPECT_EQ(back.time, st.time);
  EXPECT_EQ(back.psi, st.psi);
  EXPECT_EQ(back.theta, st.theta);

  const Discretization other(mesh_of(MeshFamily::voronoi, 4, 10), 2, 1, s.problem(1.0, 1.0));
  EXPECT_EQ(category_of([&] { load_checkpoint(path, other); }), ErrorCategory::parse);
  const Discretization other_l(mesh, 2, 2, s.problem(1.0, 1.0));
  EXPECT_EQ(category_of([&] { load_checkpoint(path, other_l); }), ErrorCategory::parse);

  std::ofstream(temp_path("junk.txt")) << "hello\n";
  EXPECT_EQ(category_of([&] { load_checkpoint(temp_path("junk.txt"), disc); }), ErrorCategory::parse);
  EXPECT_EQ(category_of([&] { load_checkpoint(temp_path("missing.txt"), disc); }), ErrorCategory::io);
  std::filesystem::remove(path);
  std::filesystem::remove(temp_path("junk.txt"));
}

TEST(InitialState, EnergyProjection) {
  Problem p;
  const Discretization disc(mesh_of(MeshFamily::triangular, 4), 2, 1, p);
  InitialData d;
  d.psi0 = [](const Point&) { return StreamSample{0.0, Point::Zero()}; };
  d.psi0_hessian = [](const Point&) { return std::array<double, 3>{0.0, 0.0, 0.0}; };
  d.theta0 = [](const Point&) { return 0.0; };
  d.theta0_grad = [](const Point&) { return Point(0.0, 0.0); };
  const SolutionState z = set_initial_state(disc, d, InitialMode::energy_project);
  EXPECT_EQ(z.psi.norm() + z.theta.norm(), 0.0);

  const SeparableSolution s = small_viscosity_solution();
  const Discretization d2(mesh_of(MeshFamily::triangular, 8), 2, 1, s.problem(1.0, 1.0));
  const SolutionState a = set_initial_state(d2, s.initial(), InitialMode::interpolate);
  const SolutionState b = set_initial_state(d2, s.initial(), InitialMode::energy_project);
  const StepErrors ea = error_step(d2, a, s.at(0.0)), eb = error_step(d2, b, s.at(0.0));
  EXPECT_LE(eb.psi_H2, 2 * ea.psi_H2);
  EXPECT_LE(eb.theta_H1, 2 * ea.theta_H1);
  EXPECT_GT((a.psi - b.psi).norm(), 0.0);

  InitialData missing = s.initial();
  missing.psi0_hessian = nullptr;
  EXPECT_EQ(category_of([&] { set_initial_state(d2, missing, InitialMode::energy_project); }), ErrorCategory::config);
}
