#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "chbc/config.hpp"
#include "chbc/control.hpp"
#include "chbc/neumann.hpp"

namespace chbc {

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // what it was compared against
  std::string note;
};

using Rng = std::mt19937_64;

namespace verify {

std::vector<CheckResult> potentials_suite(const PotentialPair& pair, double r_lo, double r_hi,
                                          int samples, Rng& rng);

std::vector<CheckResult> discretization_suite(int dimension, int n, Rng& rng);

std::vector<CheckResult> neumann_suite(const Discretization& d, Rng& rng);

/// Mass conservation, energy decay, boundedness and determinism on the
/// configured forward run.
std::vector<CheckResult> state_suite(const Discretization& d, const PotentialPair& pots,
                                     const Field& y0, const SpaceTimeControl& u,
                                     const TimeGrid& grid, const NewtonOptions& opts);

/// Order of the linearization error under epsilon halving.
std::vector<CheckResult> tangent_suite(const Discretization& d, const PotentialPair& pots,
                                       const Field& y0, const TimeGrid& grid,
                                       const NewtonOptions& opts);

/// Duality identity for zero and compatible nonzero terminal data, plus a
/// residual audit showing the base trajectory solves the step equations.
std::vector<CheckResult> duality_suite(const Discretization& d, const PotentialPair& pots,
                                       const Field& y0, const TimeGrid& grid,
                                       const NewtonOptions& opts, Rng& rng);

/// Dykstra and derivative-ball projections against the dense QP oracle.
std::vector<CheckResult> projection_suite(Rng& rng);

/// Adjoint gradient against central finite differences of the reduced cost.
std::vector<CheckResult> gradient_suite(const Discretization& d, const PotentialPair& pots,
                                        const Field& y0, const TrackingData& data,
                                        const SpaceTimeControl& box_template,
                                        const TimeGrid& grid, const NewtonOptions& opts,
                                        Rng& rng, int probes = 3);

/// Everything cmd_verify runs, using the configured sizes.
std::vector<CheckResult> run_all(const RunConfig& cfg);

}  // namespace verify

/// Max over steps of the residual norm of the coupled step equations at the
/// stored trajectory; certifies that the trajectory solves the scheme.
double max_step_residual(const Discretization& d, const PotentialPair& pots,
                         const StateTrajectory& traj, const SpaceTimeControl& u,
                         const TimeGrid& grid);

namespace oracle {

/// Dense projection onto {box} intersect {||dv/dt||_Sigma <= M0} in the
/// weighted inner product used by the control module, computed by projected
/// Gauss-Seidel with a bisected dual parameter; independent of the Dykstra
/// implementation.
Eigen::MatrixXd qp_project(const Discretization& d, const TimeGrid& g,
                           const Eigen::MatrixXd& values, const Eigen::MatrixXd& lo,
                           const Eigen::MatrixXd& hi, double M0);

}  // namespace oracle

}  // namespace chbc
