#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vemb/error.hpp"
#include "vemb/exit_codes.hpp"
#include "vemb/experiments.hpp"

using namespace vemb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vemb_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(VEMB_EXE) + " --log-level off " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct VtkFile {
  int points = 0;
  int polygons = 0;
  std::map<std::string, std::vector<double>> scalars;
};

// Minimal reader for the legacy ASCII polydata layout.
VtkFile read_vtk(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# vtk DataFile Version", 0), 0u);
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "ASCII");
  std::getline(in, line);
  EXPECT_EQ(line, "DATASET POLYDATA");
  VtkFile f;
  std::string word, type;
  in >> word >> f.points >> type;
  EXPECT_EQ(word, "POINTS");
  for (int i = 0; i < 3 * f.points; ++i) {
    double x;
    in >> x;
  }
  int size = 0;
  in >> word >> f.polygons >> size;
  EXPECT_EQ(word, "POLYGONS");
  int read = 0;
  for (int c = 0; c < f.polygons; ++c) {
    int m;
    in >> m;
    read += m + 1;
    for (int i = 0; i < m; ++i) {
      int v;
      in >> v;
      EXPECT_GE(v, 0);
      EXPECT_LT(v, f.points);
    }
  }
  EXPECT_EQ(read, size);
  int n = 0;
  in >> word >> n;
  EXPECT_EQ(word, "POINT_DATA");
  EXPECT_EQ(n, f.points);
  std::string name, lookup, table;
  int ncomp;
  while (in >> word >> name >> type >> ncomp >> lookup >> table) {
    EXPECT_EQ(word, "SCALARS");
    auto& v = f.scalars[name];
    v.resize(n);
    for (double& x : v) in >> x;
  }
  return f;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), exit_usage);
  EXPECT_EQ(run("frobnicate"), exit_usage);
  EXPECT_EQ(run("run --n"), exit_usage);
  EXPECT_EQ(run("--help"), exit_ok);
}

TEST(Cli, MeshGenerateAndValidate) {
  const fs::path dir = scratch("mesh");
  fs::create_directories(dir);
  EXPECT_EQ(run("mesh gen --family voronoi --n 6 --seed 7 --out " + (dir / "v.txt").string()), exit_ok);
  EXPECT_EQ(load_mesh(dir / "v.txt").hash(), generate_family(MeshFamily::voronoi, 6, 7).hash());
  EXPECT_EQ(run("validate " + (dir / "v.txt").string() + " --rho 0.05"), exit_ok);

  std::ofstream(dir / "sliver.txt") << "4 1\n0 0\n1 0\n1 0.001\n0 0.001\n4 0 1 2 3\n";
  EXPECT_EQ(run("validate " + (dir / "sliver.txt").string()), exit_mesh_invalid);
  std::ofstream(dir / "bad.txt") << "4 1\n0 0\n1 0\n";
  EXPECT_EQ(run("validate " + (dir / "bad.txt").string()), exit_code(ErrorCategory::parse));
  std::ofstream(dir / "cw.txt") << "4 1\n0 0\n1 0\n1 1\n0 1\n4 0 3 2 1\n";
  EXPECT_EQ(run("validate " + (dir / "cw.txt").string()), exit_code(ErrorCategory::topology));
  EXPECT_EQ(run("validate " + (dir / "missing.txt").string()), exit_code(ErrorCategory::io));
  EXPECT_EQ(run("mesh gen --family hexagonal"), exit_code(ErrorCategory::config));
  fs::remove_all(dir);
}

TEST(Cli, RunErrorsMapToCategories) {
  const fs::path dir = scratch("runerr");
  EXPECT_EQ(run("run --experiment cavity --out " + dir.string()), exit_code(ErrorCategory::config));
  EXPECT_EQ(run("run --experiment custom --nu -1 --out " + dir.string()), exit_code(ErrorCategory::config));
  EXPECT_EQ(run("run --config /nonexistent.cfg"), exit_code(ErrorCategory::io));
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "n: 4\n";
  EXPECT_EQ(run("run --config " + (dir / "bad.cfg").string()), exit_code(ErrorCategory::parse));
  fs::remove_all(dir);
}

TEST(Cli, RunWritesOutputsAndFlagsOverrideConfig) {
  const fs::path dir = scratch("custom");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "experiment = custom\nmesh = triangular\nn = 8\ndt = 0.1\nt-final = 0.3\n";
  EXPECT_EQ(run("run --config " + (dir / "run.cfg").string() + " --n 4 --out " + (dir / "out").string()), exit_ok);
  const std::string cfg = slurp(dir / "out" / "config.txt");
  EXPECT_NE(cfg.find("n = 4\n"), std::string::npos);
  EXPECT_NE(cfg.find("mesh = triangular\n"), std::string::npos);
  std::istringstream energy(slurp(dir / "out" / "energy.csv"));
  std::string line;
  std::getline(energy, line);
  EXPECT_EQ(line, "step,time,energy,newton_iterations");
  int rows = 0;
  while (std::getline(energy, line)) ++rows;
  EXPECT_EQ(rows, 4);
  fs::remove_all(dir);
}

TEST(Experiments, RerunsAreByteIdentical) {
  ExperimentConfig c;
  c.experiment = Experiment::accuracy;
  c.mesh = MeshFamily::voronoi;
  c.seed = 3;
  c.levels = {2, 4};
  c.out = scratch("rerun_a");
  run_experiment(c);
  const fs::path first = c.out;
  c.out = scratch("rerun_b");
  run_experiment(c);
  const std::string a = slurp(first / "convergence.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(c.out / "convergence.csv"));
  fs::remove_all(first);
  fs::remove_all(c.out);
}

TEST(Experiments, CavityOutputsAndVtkRoundTrip) {
  ExperimentConfig c;
  c.experiment = Experiment::cavity;
  c.ra = 1e3;
  c.n = 4;
  c.dt = 0.05;
  c.t_final = 0.1;
  c.samples = 21;
  c.out = scratch("cavity");
  run_experiment(c);
  for (const char* f : {"config.txt", "summary.csv", "profile_u2_y05.csv", "profile_u1_x05.csv", "nusselt_left.csv",
                        "nusselt_right.csv", "checkpoint.txt", "fields.vtk"}) {
    EXPECT_TRUE(fs::exists(c.out / f)) << f;
  }
  const PolygonalMesh mesh = generate_family(MeshFamily::quad_uniform, 4);
  const VtkFile v = read_vtk(c.out / "fields.vtk");
  EXPECT_EQ(v.points, mesh.n_vertices());
  EXPECT_EQ(v.polygons, mesh.n_cells());
  ASSERT_EQ(v.scalars.size(), 4u);
  for (const auto& [name, values] : v.scalars)
    for (double x : values) EXPECT_TRUE(std::isfinite(x)) << name;
  // vertex DOFs on the heated walls hold the Dirichlet values exactly
  const Discretization disc(std::make_shared<const PolygonalMesh>(mesh), 2, 1, cavity_problem(0.71, 1e3));
  const SolutionState st = load_checkpoint(c.out / "checkpoint.txt", disc);
  EXPECT_EQ(st.step, 2);
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    if (mesh.vertex(i).x() == 0.0) EXPECT_EQ(st.theta(i), 1.0);
    if (mesh.vertex(i).x() == 1.0) EXPECT_EQ(st.theta(i), 0.0);
  }
  std::istringstream prof(slurp(c.out / "profile_u2_y05.csv"));
  std::string line;
  std::getline(prof, line);
  EXPECT_EQ(line, "s,value");
  int rows = 0;
  while (std::getline(prof, line)) ++rows;
  EXPECT_EQ(rows, 21);
  fs::remove_all(c.out);
}

TEST(Experiments, ZeroStateExportsZeros) {
  const auto mesh = std::make_shared<const PolygonalMesh>(generate_family(MeshFamily::concave_rhombic, 3));
  const Discretization disc(mesh, 2, 1, Problem{});
  SolutionState z;
  z.psi = Eigen::VectorXd::Zero(disc.index().n_stream);
  z.theta = Eigen::VectorXd::Zero(disc.index().n_temp);
  const fs::path p = scratch("zero.vtk");
  export_fields(disc, z, p);
  const VtkFile v = read_vtk(p);
  for (const auto& [name, values] : v.scalars)
    for (double x : values) EXPECT_EQ(x, 0.0) << name;
  fs::remove(p);
}

TEST(Experiments, OneCellExportOfQuadratic) {
  const auto mesh = std::make_shared<const PolygonalMesh>(
      PolygonalMesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}}));
  const Discretization disc(mesh, 2, 1, Problem{});
  SolutionState s;
  s.psi = disc.interpolate_stream([](const Point& x) { return StreamSample{x.x() * x.x(), Point(2 * x.x(), 0.0)}; });
  s.theta = Eigen::VectorXd::Zero(disc.index().n_temp);
  const fs::path p = scratch("one.vtk");
  export_fields(disc, s, p);
  const VtkFile v = read_vtk(p);
  ASSERT_EQ(v.points, 4);
  const double want_psi[] = {0, 1, 1, 0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(v.scalars.at("psi")[i], want_psi[i], 1e-12);
    EXPECT_NEAR(v.scalars.at("u2")[i], -2 * want_psi[i], 1e-12);
    EXPECT_NEAR(v.scalars.at("u1")[i], 0.0, 1e-12);
  }
  fs::remove(p);
}
