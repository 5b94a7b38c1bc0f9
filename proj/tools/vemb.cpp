#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "vemb/config.hpp"
#include "vemb/error.hpp"
#include "vemb/exit_codes.hpp"
#include "vemb/experiments.hpp"
#include "vemb/mesh.hpp"

namespace {

int run_command(const std::string& config_file, const std::map<std::string, std::string>& flags, bool steady) {
  vemb::ExperimentConfig config = config_file.empty() ? vemb::ExperimentConfig{} : vemb::load_config(config_file);
  for (const auto& [key, value] : flags) vemb::set_option(config, key, value);
  if (steady) config.steady = true;
  vemb::validate(config);
  vemb::run_experiment(config);
  fmt::print("wrote {}\n", config.out.string());
  return vemb::exit_ok;
}

int mesh_gen(const std::string& family, int n, std::uint64_t seed, const std::string& out) {
  const auto mesh = vemb::generate_family(vemb::parse_mesh_family(family), n, seed);
  if (out.empty() || out == "-") {
    std::cout << vemb::format_mesh(mesh);
  } else {
    vemb::save_mesh(mesh, out);
    fmt::print("{}: {} vertices, {} cells\n", out, mesh.n_vertices(), mesh.n_cells());
  }
  return vemb::exit_ok;
}

int validate_mesh(const std::string& path, double rho) {
  const auto mesh = vemb::load_mesh(path);
  const auto report = vemb::validate(mesh, rho);
  fmt::print("cells {} vertices {} edges {} h {:.6g}\n", mesh.n_cells(), mesh.n_vertices(), mesh.n_edges(), mesh.h());
  fmt::print("rho {:g}: min edge/h_E {:.6g}, min kernel radius/h_E {:.6g}\n", rho, report.min_edge_ratio,
             report.min_kernel_ratio);
  for (const auto& f : report.violations) {
    fmt::print("cell {}: edge/h_E {:.6g}{}, kernel/h_E {:.6g}{}\n", f.cell, f.edge_ratio, f.a2 ? "" : " (too short)",
               f.kernel_ratio, f.a1 ? "" : " (not star-shaped enough)");
  }
  if (!report.passed()) {
    fmt::print(stderr, "vemb: {} of {} cells violate the regularity assumptions\n", report.violations.size(),
               mesh.n_cells());
    return vemb::exit_mesh_invalid;
  }
  fmt::print("ok\n");
  return vemb::exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual element solver for the Boussinesq equations in stream-function form"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  auto* run = app.add_subcommand("run", "Run an experiment and write its tables into --out");
  std::string config_file;
  run->add_option("--config", config_file, "key = value configuration file; flags override it");
  std::map<std::string, std::string> raw;
  bool steady = false;
  for (const auto& key : vemb::config_keys()) {
    if (key == "steady") continue;
    run->add_option_function<std::string>("--" + key, [&raw, key](const std::string& v) { raw[key] = v; });
  }
  run->add_flag("--steady", steady, "stop once ||x^n - x^{n-1}||_inf / dt < steady-tol");

  auto* mesh = app.add_subcommand("mesh", "Mesh utilities");
  mesh->require_subcommand(1);
  auto* gen = mesh->add_subcommand("gen", "Generate a mesh of one of the five families");
  std::string family = "quad_uniform";
  int n = 8;
  std::uint64_t seed = 0;
  std::string out;
  gen->add_option("--family", family, "quad_distorted, triangular, voronoi, concave_rhombic or quad_uniform")
      ->capture_default_str();
  gen->add_option("--n", n, "subdivisions per side")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "random seed")->capture_default_str();
  gen->add_option("--out", out, "output file (stdout when omitted)");

  auto* val = app.add_subcommand("validate", "Check the mesh regularity assumptions");
  std::string mesh_path;
  double rho = 0.05;
  val->add_option("mesh", mesh_path, "mesh file")->required();
  val->add_option("--rho", rho, "regularity constant")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? vemb::exit_ok : vemb::exit_usage;
  }

  const auto level = spdlog::level::from_str(log_level);
  spdlog::set_level(level);
  spdlog::set_pattern("[%l] %v");

  try {
    if (run->parsed()) return run_command(config_file, raw, steady);
    if (gen->parsed()) return mesh_gen(family, n, seed, out);
    if (val->parsed()) return validate_mesh(mesh_path, rho);
  } catch (const vemb::Error& e) {
    fmt::print(stderr, "vemb: {}\n", e.what());
    return vemb::exit_code(e.category());
  } catch (const std::exception& e) {
    fmt::print(stderr, "vemb: internal error: {}\n", e.what());
    return vemb::exit_internal;
  }
  return vemb::exit_usage;
}
