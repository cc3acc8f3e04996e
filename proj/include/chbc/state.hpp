#pragma once

#include <vector>

#include "chbc/discretization.hpp"
#include "chbc/potentials.hpp"
#include "chbc/time_grid.hpp"

namespace chbc {

/// Boundary control on the space-time cylinder Sigma: one value per boundary
/// node and time node, with box bounds and an L2-in-time derivative bound M0
/// describing the admissible set U_ad.
struct SpaceTimeControl {
  Eigen::MatrixXd values;  // boundary_nodes x (steps+1)
  Eigen::MatrixXd u_min;   // same shape; -inf where unbounded
  Eigen::MatrixXd u_max;
  double M0 = kInf;

  static SpaceTimeControl zero(const Discretization& d, const TimeGrid& g);

  void set_box(double lo, double hi);
  bool box_consistent() const { return (u_min.array() <= u_max.array()).all(); }
};

/// Solution triplet of the forward system: order parameter y (t_0..t_N),
/// its trace y_gamma, and the chemical potential w (t_1..t_N, so w[k] is
/// the potential at t_{k+1}).  m0 is the conserved mean of y_0.
struct StateTrajectory {
  std::vector<Field> y;
  std::vector<BoundaryField> y_gamma;
  std::vector<Field> w;
  double m0 = 0.0;

  int steps() const { return static_cast<int>(w.size()); }
};

struct NewtonOptions {
  double tol_abs = 1e-11;
  double tol_rel = 1e-10;
  int max_iter = 25;
  int max_backtracks = 12;
  bool natural_ordering = false;  // linear-solver ordering probe
};

/// Implicit Euler with convex-concave splitting: per step the coupled system
///   M (y+ - y)/tau + K w+ = 0
///   M w+ = K y+ + M (f_cx'(y+) + f_cc'(y))
///        + T'[ Mb (yG+ - yG)/tau + Kb yG+ + Mb (fb_cx'(yG+) + fb_cc'(yG) - u+) ]
/// is solved by Newton on (y+, w+).  Mass is conserved exactly (the v = 1
/// test annihilates K) and the free energy decreases when u = 0.
StateTrajectory solve_state(const Discretization& d, const PotentialPair& pots, const Field& y0,
                            const SpaceTimeControl& u, const TimeGrid& grid,
                            const NewtonOptions& opts = {});

/// 1/2 y'Ky + 1/2 yG'Kb yG + sum_i M_ii f(y_i) + sum_b Mb_bb f_Gamma(yG_b).
double free_energy(const Discretization& d, const PotentialPair& pots, const Field& y,
                   const BoundaryField& y_gamma);

/// Empirical Lipschitz monitor: trajectory-difference aggregate (sup of dual
/// norms and boundary norms plus L2 gradient terms) divided by the
/// L2(Sigma) norm of the control difference.
double continuous_dependence_ratio(const Discretization& d, const PotentialPair& pots,
                                   const Field& y0, const SpaceTimeControl& u1,
                                   const SpaceTimeControl& u2, const TimeGrid& grid,
                                   const NewtonOptions& opts = {});

/// Run-level diagnostics used by reports and the verification suites.
struct StateSummary {
  double mass_drift = 0.0;       // max_k |mean(y_k) - m0|
  double max_abs_y = 0.0;        // sup_k max_i |y_k|
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_energy_increase = 0.0;  // max over steps of E_{k+1} - E_k
};

StateSummary summarize_state(const Discretization& d, const PotentialPair& pots,
                             const StateTrajectory& traj);

}  // namespace chbc
