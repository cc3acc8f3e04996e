#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chbc/control.hpp"

namespace chbc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named field profile: "zero", "constant(c)", "cosine(k,amp)" or "csv(path)".
/// Analytic profiles are 1D amp*cos(k pi x) and 2D amp*cos(k pi x)cos(k pi y);
/// boundary profiles are the trace of the bulk profile.
struct Profile {
  enum class Kind { Zero, Constant, Cosine, Csv } kind = Kind::Zero;
  double value = 0.0;  // constant
  int k = 1;           // cosine wave number
  double amp = 0.0;    // cosine amplitude
  std::string path;    // csv
};

Profile parse_profile(const std::string& text);
Field realize_bulk_profile(const Profile& p, const Discretization& d);
BoundaryField realize_boundary_profile(const Profile& p, const Discretization& d);

/// Run parameters assembled from a sectioned key = value file.
struct RunConfig {
  // [mesh]
  int dimension = 1;
  int n = 32;
  // [time]
  double T = 0.1;
  int steps = 100;
  // [potentials]
  std::string potential_kind = "regular_double_well";
  std::vector<double> bulk_coeffs;
  std::vector<double> boundary_coeffs;
  double eta = 1.0;
  double C_compat = 0.0;
  double lower_bound_fpp = -1.0;
  double lower_bound_fGpp = -1.0;
  double validate_lo = -3.0;
  double validate_hi = 3.0;
  int validate_samples = 601;
  // [initial]
  std::string initial_profile = "cosine(1,0.1)";
  // [control]
  std::string control_initial = "zero";
  double u_min = -kInf;
  double u_max = kInf;
  double M0 = kInf;
  // [tracking]
  std::string zQ = "zero", zSigma = "zero", zOmega = "zero", zGamma = "zero";
  double bQ = 1.0, bSigma = 0.0, bOmega = 0.0, bGamma = 0.0, b0 = 1e-2;
  // [solver]
  NewtonOptions newton;
  double vi_tol = 1e-6;
  int max_opt_iter = 200;
  double dykstra_tol = 1e-10;
  int dykstra_max_sweeps = 20000;
  // [output]
  std::string output_dir = "out";
  std::uint64_t seed = 12345;
  bool write_vtk = false;
  int snapshot_stride = 0;  // 0: final snapshot only
  bool export_operators = false;

  std::string config_dir;  // directory of the config file; csv paths resolve against it
};

RunConfig load_config(const std::string& path);

Discretization make_discretization(const RunConfig& cfg);
PotentialPair make_potentials(const RunConfig& cfg);
TimeGrid make_time_grid(const RunConfig& cfg);
Field make_initial(const RunConfig& cfg, const Discretization& d);
SpaceTimeControl make_control(const RunConfig& cfg, const Discretization& d,
                              const TimeGrid& grid);
TrackingData make_tracking(const RunConfig& cfg, const Discretization& d, const TimeGrid& grid);
OptimizeOptions make_optimize_options(const RunConfig& cfg);

}  // namespace chbc
