#include "chbc/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chbc/io.hpp"

namespace chbc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct Ini {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }
  std::string get(const std::string& sec, const std::string& key, const std::string& def) const {
    const auto s = sections.find(sec);
    if (s == sections.end()) return def;
    const auto k = s->second.find(key);
    return k == s->second.end() ? def : k->second;
  }
  double get_double(const std::string& sec, const std::string& key, double def) const {
    const std::string v = get(sec, key, "");
    if (v.empty()) return def;
    if (v == "inf" || v == "+inf" || v == "infinity") return kInf;
    if (v == "-inf") return -kInf;
    try {
      return std::stod(v);
    } catch (...) {
      throw ConfigError("[" + sec + "] " + key + ": not a number: " + v);
    }
  }
  int get_int(const std::string& sec, const std::string& key, int def) const {
    const std::string v = get(sec, key, "");
    if (v.empty()) return def;
    try {
      return std::stoi(v);
    } catch (...) {
      throw ConfigError("[" + sec + "] " + key + ": not an integer: " + v);
    }
  }
  bool get_bool(const std::string& sec, const std::string& key, bool def) const {
    const std::string v = get(sec, key, "");
    if (v.empty()) return def;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("[" + sec + "] " + key + ": not a boolean: " + v);
  }
};

Ini parse_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Ini ini;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return ini;
}

std::vector<double> parse_coeff_list(const std::string& text) {
  std::vector<double> out;
  std::string tok;
  std::istringstream is(text);
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::string resolve(const RunConfig& cfg, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || cfg.config_dir.empty()) return path;
  return (std::filesystem::path(cfg.config_dir) / p).string();
}

}  // namespace

Profile parse_profile(const std::string& text) {
  const std::string t = trim(text);
  Profile p;
  if (t == "zero") {
    p.kind = Profile::Kind::Zero;
    return p;
  }
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')')
    throw ConfigError("unrecognized profile: " + t);
  const std::string name = trim(t.substr(0, open));
  const std::string args = t.substr(open + 1, t.size() - open - 2);
  if (name == "constant") {
    p.kind = Profile::Kind::Constant;
    p.value = std::stod(args);
  } else if (name == "cosine") {
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("cosine profile needs (k, amplitude)");
    p.kind = Profile::Kind::Cosine;
    p.k = std::stoi(trim(args.substr(0, comma)));
    p.amp = std::stod(trim(args.substr(comma + 1)));
  } else if (name == "csv") {
    p.kind = Profile::Kind::Csv;
    p.path = trim(args);
  } else {
    throw ConfigError("unrecognized profile: " + t);
  }
  return p;
}

Field realize_bulk_profile(const Profile& p, const Discretization& d) {
  switch (p.kind) {
    case Profile::Kind::Zero:
      return Field::Zero(d.bulk_nodes);
    case Profile::Kind::Constant:
      return Field::Constant(d.bulk_nodes, p.value);
    case Profile::Kind::Cosine: {
      Field f(d.bulk_nodes);
      const double kpi = p.k * M_PI;
      for (int i = 0; i < d.bulk_nodes; ++i) {
        double v = p.amp * std::cos(kpi * d.coords(i, 0));
        if (d.dimension == 2) v *= std::cos(kpi * d.coords(i, 1));
        f[i] = v;
      }
      return f;
    }
    case Profile::Kind::Csv:
      return read_field_csv(p.path, d.bulk_nodes);
  }
  throw ConfigError("unreachable profile kind");
}

BoundaryField realize_boundary_profile(const Profile& p, const Discretization& d) {
  if (p.kind == Profile::Kind::Csv) return read_field_csv(p.path, d.boundary_nodes());
  return d.trace(realize_bulk_profile(p, d));
}

RunConfig load_config(const std::string& path) {
  const Ini ini = parse_ini(path);
  RunConfig cfg;
  cfg.config_dir = std::filesystem::path(path).parent_path().string();

  cfg.dimension = ini.get_int("mesh", "dimension", cfg.dimension);
  cfg.n = ini.get_int("mesh", "n", cfg.n);
  if (cfg.dimension != 1 && cfg.dimension != 2)
    throw ConfigError("[mesh] dimension must be 1 or 2");
  if (cfg.n < 2) throw ConfigError("[mesh] n must be at least 2");

  cfg.T = ini.get_double("time", "T", cfg.T);
  cfg.steps = ini.get_int("time", "steps", cfg.steps);
  if (cfg.T <= 0 || cfg.steps < 1) throw ConfigError("[time] needs T > 0 and steps >= 1");

  cfg.potential_kind = ini.get("potentials", "kind", cfg.potential_kind);
  if (cfg.potential_kind == "polynomial") {
    if (!ini.has("potentials", "bulk_coeffs") || !ini.has("potentials", "boundary_coeffs"))
      throw ConfigError("[potentials] polynomial kind needs bulk_coeffs and boundary_coeffs");
    cfg.bulk_coeffs = parse_coeff_list(ini.get("potentials", "bulk_coeffs", ""));
    cfg.boundary_coeffs = parse_coeff_list(ini.get("potentials", "boundary_coeffs", ""));
  } else if (cfg.potential_kind != "regular_double_well") {
    throw ConfigError("[potentials] kind must be regular_double_well or polynomial");
  }
  cfg.eta = ini.get_double("potentials", "eta", cfg.eta);
  cfg.C_compat = ini.get_double("potentials", "C", cfg.C_compat);
  cfg.lower_bound_fpp = ini.get_double("potentials", "lower_bound_fpp", cfg.lower_bound_fpp);
  cfg.lower_bound_fGpp = ini.get_double("potentials", "lower_bound_fGpp", cfg.lower_bound_fGpp);
  cfg.validate_lo = ini.get_double("potentials", "validate_lo", cfg.validate_lo);
  cfg.validate_hi = ini.get_double("potentials", "validate_hi", cfg.validate_hi);
  cfg.validate_samples = ini.get_int("potentials", "validate_samples", cfg.validate_samples);

  cfg.initial_profile = ini.get("initial", "profile", cfg.initial_profile);

  cfg.control_initial = ini.get("control", "initial", cfg.control_initial);
  cfg.u_min = ini.get_double("control", "u_min", cfg.u_min);
  cfg.u_max = ini.get_double("control", "u_max", cfg.u_max);
  cfg.M0 = ini.get_double("control", "M0", cfg.M0);
  if (cfg.u_min > cfg.u_max) throw ConfigError("[control] u_min exceeds u_max");
  if (!(cfg.M0 > 0)) throw ConfigError("[control] M0 must be positive (or inf)");

  cfg.zQ = ini.get("tracking", "zQ", cfg.zQ);
  cfg.zSigma = ini.get("tracking", "zSigma", cfg.zSigma);
  cfg.zOmega = ini.get("tracking", "zOmega", cfg.zOmega);
  cfg.zGamma = ini.get("tracking", "zGamma", cfg.zGamma);
  cfg.bQ = ini.get_double("tracking", "bQ", cfg.bQ);
  cfg.bSigma = ini.get_double("tracking", "bSigma", cfg.bSigma);
  cfg.bOmega = ini.get_double("tracking", "bOmega", cfg.bOmega);
  cfg.bGamma = ini.get_double("tracking", "bGamma", cfg.bGamma);
  cfg.b0 = ini.get_double("tracking", "b0", cfg.b0);
  if (cfg.bQ < 0 || cfg.bSigma < 0 || cfg.bOmega < 0 || cfg.bGamma < 0 || cfg.b0 < 0)
    throw ConfigError("[tracking] weights must be nonnegative");

  cfg.newton.tol_abs = ini.get_double("solver", "newton_tol_abs", cfg.newton.tol_abs);
  cfg.newton.tol_rel = ini.get_double("solver", "newton_tol_rel", cfg.newton.tol_rel);
  cfg.newton.max_iter = ini.get_int("solver", "newton_max_iter", cfg.newton.max_iter);
  cfg.vi_tol = ini.get_double("solver", "vi_tol", cfg.vi_tol);
  cfg.max_opt_iter = ini.get_int("solver", "max_opt_iter", cfg.max_opt_iter);
  cfg.dykstra_tol = ini.get_double("solver", "dykstra_tol", cfg.dykstra_tol);
  cfg.dykstra_max_sweeps = ini.get_int("solver", "dykstra_max_sweeps", cfg.dykstra_max_sweeps);
  if (cfg.newton.tol_abs <= 0 || cfg.newton.max_iter < 1)
    throw ConfigError("[solver] invalid Newton options");

  cfg.output_dir = ini.get("output", "dir", cfg.output_dir);
  cfg.seed = static_cast<std::uint64_t>(ini.get_double("output", "seed", 12345));
  cfg.write_vtk = ini.get_bool("output", "write_vtk", cfg.write_vtk);
  cfg.snapshot_stride = ini.get_int("output", "snapshot_stride", cfg.snapshot_stride);
  cfg.export_operators = ini.get_bool("output", "export_operators", cfg.export_operators);
  return cfg;
}

Discretization make_discretization(const RunConfig& cfg) {
  return cfg.dimension == 1 ? build_interval_mesh(cfg.n) : build_square_mesh(cfg.n);
}

PotentialPair make_potentials(const RunConfig& cfg) {
  if (cfg.potential_kind == "regular_double_well") return regular_double_well();
  PotentialPair pair;
  pair.bulk.poly = Polynomial(cfg.bulk_coeffs);
  pair.boundary.poly = Polynomial(cfg.boundary_coeffs);
  pair.eta = cfg.eta;
  pair.C_compat = cfg.C_compat;
  pair.lower_bound_fpp = cfg.lower_bound_fpp;
  pair.lower_bound_fGpp = cfg.lower_bound_fGpp;
  return pair;
}

TimeGrid make_time_grid(const RunConfig& cfg) { return TimeGrid{cfg.T, cfg.steps}; }

namespace {

Profile parse_resolved(const RunConfig& cfg, const std::string& text) {
  Profile p = parse_profile(text);
  if (p.kind == Profile::Kind::Csv) {
    p.path = resolve(cfg, p.path);
    if (!std::filesystem::exists(p.path)) throw ConfigError("referenced file missing: " + p.path);
  }
  return p;
}

}  // namespace

Field make_initial(const RunConfig& cfg, const Discretization& d) {
  return realize_bulk_profile(parse_resolved(cfg, cfg.initial_profile), d);
}

SpaceTimeControl make_control(const RunConfig& cfg, const Discretization& d,
                              const TimeGrid& grid) {
  SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
  const Profile p = parse_resolved(cfg, cfg.control_initial);
  if (p.kind == Profile::Kind::Csv) {
    u.values = read_control_csv(p.path, d, grid);
  } else {
    const BoundaryField g = realize_boundary_profile(p, d);
    for (int k = 0; k <= grid.steps; ++k) u.values.col(k) = g;
  }
  u.set_box(cfg.u_min, cfg.u_max);
  u.M0 = cfg.M0;
  return u;
}

TrackingData make_tracking(const RunConfig& cfg, const Discretization& d, const TimeGrid& grid) {
  TrackingData data;
  data.bQ = cfg.bQ;
  data.bSigma = cfg.bSigma;
  data.bOmega = cfg.bOmega;
  data.bGamma = cfg.bGamma;
  data.b0 = cfg.b0;

  const Profile pQ = parse_resolved(cfg, cfg.zQ);
  if (pQ.kind != Profile::Kind::Zero) {
    const Field z = realize_bulk_profile(pQ, d);
    data.z_Q.assign(grid.steps + 1, z);
  }
  const Profile pS = parse_resolved(cfg, cfg.zSigma);
  if (pS.kind != Profile::Kind::Zero) {
    const BoundaryField z = realize_boundary_profile(pS, d);
    data.z_Sigma.assign(grid.steps + 1, z);
  }
  const Profile pO = parse_resolved(cfg, cfg.zOmega);
  if (pO.kind != Profile::Kind::Zero) data.z_Omega = realize_bulk_profile(pO, d);
  const Profile pG = parse_resolved(cfg, cfg.zGamma);
  if (pG.kind != Profile::Kind::Zero) data.z_Gamma = realize_boundary_profile(pG, d);
  return data;
}

OptimizeOptions make_optimize_options(const RunConfig& cfg) {
  OptimizeOptions opts;
  opts.vi_tol = cfg.vi_tol;
  opts.max_iter = cfg.max_opt_iter;
  opts.dykstra_tol = cfg.dykstra_tol;
  opts.dykstra_max_sweeps = cfg.dykstra_max_sweeps;
  opts.newton = cfg.newton;
  return opts;
}

}  // namespace chbc
