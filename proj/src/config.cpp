#include "vemb/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "vemb/error.hpp"

namespace vemb {

std::string_view to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::accuracy: return "accuracy";
    case Experiment::small_viscosity: return "small_viscosity";
    case Experiment::cavity: return "cavity";
    case Experiment::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(Schedule s) noexcept {
  switch (s) {
    case Schedule::diagonal: return "diagonal";
    case Schedule::quadratic: return "quadratic";
    case Schedule::table: return "table";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize_key(std::string_view key) {
  std::string k = trim(key);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(ErrorCategory::config, fmt::format("{}: '{}' is not {}", key, value, expected));
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    // allow fractions like 1/16
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
      return parse_double(key, s.substr(0, slash)) / parse_double(key, s.substr(slash + 1));
    }
    bad_value(key, v, "a number");
  }
  return x;
}

long long parse_int(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  long long x = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) bad_value(key, v, "an integer");
  return x;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  bad_value(key, v, "a boolean");
}

template <class T, class F>
std::vector<T> parse_list(std::string_view v, F&& one) {
  std::vector<T> out;
  std::string s(v);
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(one(tok));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"experiment",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         const std::string s = trim(v);
         for (auto e : {Experiment::accuracy, Experiment::small_viscosity, Experiment::cavity, Experiment::custom}) {
           if (s == to_string(e) || (e == Experiment::small_viscosity && s == "small-viscosity")) {
             c.experiment = e;
             return;
           }
         }
         bad_value(k, v, "one of accuracy, small_viscosity, cavity, custom");
       }},
      {"mesh",
       [](ExperimentConfig& c, std::string_view, std::string_view v) { c.mesh = parse_mesh_family(trim(v)); }},
      {"mesh-file", [](ExperimentConfig& c, std::string_view, std::string_view v) {
         const std::string s = trim(v);
         if (s.empty()) c.mesh_file.reset(); else c.mesh_file = s;
       }},
      {"n", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.n = static_cast<int>(parse_int(k, v)); }},
      {"seed",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         const auto s = parse_int(k, v);
         if (s < 0) bad_value(k, v, "a non-negative integer");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"k", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.k = static_cast<int>(parse_int(k, v)); }},
      {"ell",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.ell = static_cast<int>(parse_int(k, v)); }},
      {"nu", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.nu = parse_double(k, v); }},
      {"kappa", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.kappa = parse_double(k, v); }},
      {"pr", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.pr = parse_double(k, v); }},
      {"ra", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.ra = parse_double(k, v); }},
      {"dt", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.dt = parse_double(k, v); }},
      {"t-final", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.t_final = parse_double(k, v); }},
      {"newton-tol",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.newton_tol = parse_double(k, v); }},
      {"newton-max-iter",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.newton_max_iter = static_cast<int>(parse_int(k, v));
       }},
      {"steady", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.steady = parse_bool(k, v); }},
      {"steady-tol",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.steady_tol = parse_double(k, v); }},
      {"initial",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         const std::string s = trim(v);
         if (s == "interpolate") c.initial = InitialMode::interpolate;
         else if (s == "energy" || s == "energy_project" || s == "energy-project") c.initial = InitialMode::energy_project;
         else bad_value(k, v, "interpolate or energy");
       }},
      {"schedule",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         const std::string s = trim(v);
         for (auto e : {Schedule::diagonal, Schedule::quadratic, Schedule::table}) {
           if (s == to_string(e)) {
             c.schedule = e;
             return;
           }
         }
         bad_value(k, v, "diagonal, quadratic or table");
       }},
      {"levels",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.levels = parse_list<int>(v, [&](const std::string& t) { return static_cast<int>(parse_int(k, t)); });
       }},
      {"nu-list",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.nu_list = parse_list<double>(v, [&](const std::string& t) { return parse_double(k, t); });
       }},
      {"dt-list",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) {
         c.dt_list = parse_list<double>(v, [&](const std::string& t) { return parse_double(k, t); });
       }},
      {"samples",
       [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.samples = static_cast<int>(parse_int(k, v)); }},
      {"vtk", [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.vtk = parse_bool(k, v); }},
      {"out", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.out = trim(v); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_option(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const std::string k = normalize_key(key);
  for (const auto& [name, set] : setters()) {
    if (name == k) {
      set(config, name, value);
      return;
    }
  }
  throw Error(ErrorCategory::config, fmt::format("unknown configuration key '{}'", key));
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::parse, fmt::format("config line {}: expected key = value", lineno));
    }
    const std::string key = normalize_key(line.substr(0, eq));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorCategory::config, fmt::format("config line {}: unknown key '{}'", lineno, key));
    }
    if (kv.count(key) != 0) throw Error(ErrorCategory::config, fmt::format("config line {}: duplicate key '{}'", lineno, key));
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c;
  for (const auto& [k, v] : parse_config_text(ss.str())) set_option(c, k, v);
  return c;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCategory::config, msg); };
  if (!(c.nu > 0)) fail("nu must be positive");
  if (!(c.kappa > 0)) fail("kappa must be positive");
  if (!(c.dt > 0)) fail("dt must be positive");
  if (!(c.t_final > 0)) fail("t-final must be positive");
  if (c.t_final < c.dt * (1 - 1e-12)) fail("t-final must be at least dt");
  if (c.k < 2) fail("k must be at least 2");
  if (c.ell < 1) fail("ell must be at least 1");
  if (c.n < 1) fail("n must be at least 1");
  if (!(c.newton_tol > 0)) fail("newton-tol must be positive");
  if (c.newton_max_iter < 1) fail("newton-max-iter must be at least 1");
  if (!(c.steady_tol > 0)) fail("steady-tol must be positive");
  if (c.samples < 2) fail("samples must be at least 2");
  if (c.experiment == Experiment::cavity) {
    if (!c.pr || !(*c.pr > 0)) fail("cavity needs a positive pr");
    if (!c.ra || !(*c.ra > 0)) fail("cavity needs a positive ra");
  }
  if (c.experiment == Experiment::accuracy || c.experiment == Experiment::small_viscosity) {
    if (c.mesh_file) fail("accuracy studies refine generated meshes; mesh-file is not accepted");
    if (c.levels.empty()) fail("levels must not be empty");
    for (int n : c.levels)
      if (n < 1) fail("levels must be positive");
  }
  if (c.experiment == Experiment::accuracy && c.schedule != Schedule::table && c.levels.size() < 2) {
    fail("a convergence study needs at least two levels");
  }
  if (c.experiment == Experiment::small_viscosity) {
    if (c.nu_list.empty() || c.dt_list.empty()) fail("nu-list and dt-list must not be empty");
    for (double v : c.nu_list)
      if (!(v > 0)) fail("every nu in nu-list must be positive");
    for (double v : c.dt_list)
      if (!(v > 0)) fail("every dt in dt-list must be positive");
  }
}

std::string format_config(const ExperimentConfig& c) {
  std::string s;
  auto line = [&](std::string_view k, const std::string& v) { s += fmt::format("{} = {}\n", k, v); };
  auto num = [](double x) { return fmt::format("{:.17g}", x); };
  auto join = [](const auto& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "," : "") + fmt::format("{:.17g}", static_cast<double>(v[i]));
    return r;
  };
  line("experiment", std::string(to_string(c.experiment)));
  line("mesh", std::string(to_string(c.mesh)));
  if (c.mesh_file) line("mesh-file", c.mesh_file->string());
  line("n", std::to_string(c.n));
  line("seed", std::to_string(c.seed));
  line("k", std::to_string(c.k));
  line("ell", std::to_string(c.ell));
  line("nu", num(c.nu));
  line("kappa", num(c.kappa));
  if (c.pr) line("pr", num(*c.pr));
  if (c.ra) line("ra", num(*c.ra));
  line("dt", num(c.dt));
  line("t-final", num(c.t_final));
  line("newton-tol", num(c.newton_tol));
  line("newton-max-iter", std::to_string(c.newton_max_iter));
  line("steady", c.steady ? "true" : "false");
  line("steady-tol", num(c.steady_tol));
  line("initial", c.initial == InitialMode::interpolate ? "interpolate" : "energy");
  line("schedule", std::string(to_string(c.schedule)));
  line("levels", join(c.levels));
  line("nu-list", join(c.nu_list));
  line("dt-list", join(c.dt_list));
  line("samples", std::to_string(c.samples));
  line("vtk", c.vtk ? "true" : "false");
  line("out", c.out.string());
  return s;
}

}  // namespace vemb
