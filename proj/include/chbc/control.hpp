#pragma once

#include <string>
#include <vector>

#include "chbc/sensitivity.hpp"

namespace chbc {

/// Tracking cost: (bQ/2)||y - z_Q||^2_Q + (bSigma/2)||y_G - z_S||^2_Sigma
/// + (bOmega/2)||y(T) - z_O||^2 + (bGamma/2)||y_G(T) - z_G||^2
/// + (b0/2)||u||^2_Sigma, trapezoidal in time.
double evaluate_cost(const Discretization& d, const StateTrajectory& traj,
                     const SpaceTimeControl& u, const TrackingData& data, const TimeGrid& grid);

/// Riesz representative of the cost derivative in the L2(Sigma) inner
/// product: g_k = q_gamma_k + b0 u_k (with no adjoint part at time node 0).
Eigen::MatrixXd reduced_gradient(const AdjointTrajectory& adj, const SpaceTimeControl& u,
                                 double b0);

/// Componentwise clamp; the exact L2(Sigma) projection onto the box alone.
Eigen::MatrixXd project_box(const Eigen::MatrixXd& values, const Eigen::MatrixXd& lo,
                            const Eigen::MatrixXd& hi);

/// Exact L2(Sigma) projection onto {v : ||dv/dt||_{L2(Sigma)} <= M0} via a
/// scalar dual parameter and per-node tridiagonal solves.
Eigen::MatrixXd project_derivative_ball(const Discretization& d, const TimeGrid& g,
                                        const Eigen::MatrixXd& values, double M0,
                                        double tol = 1e-12);

struct AdmissibleProjection {
  Eigen::MatrixXd values;
  bool converged = false;
  int sweeps = 0;
};

/// Dykstra alternation between the box and the derivative ball; converges to
/// the L2(Sigma) projection onto their intersection.
AdmissibleProjection project_admissible(const Discretization& d, const TimeGrid& g,
                                        const Eigen::MatrixXd& values, const Eigen::MatrixXd& lo,
                                        const Eigen::MatrixXd& hi, double M0, double tol = 1e-10,
                                        int max_sweeps = 20000);

/// Natural residual ||u - P_ad(u - g)||_Sigma of the variational inequality.
double vi_residual(const Discretization& d, const TimeGrid& g, const SpaceTimeControl& u,
                   const Eigen::MatrixXd& grad);

struct OptimizeOptions {
  double vi_tol = 1e-6;
  int max_iter = 200;
  double armijo_sigma = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  double step_min = 1e-6;
  double step_max = 1e2;
  double dykstra_tol = 1e-10;
  int dykstra_max_sweeps = 20000;
  NewtonOptions newton;
};

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  double vi_residual = 0.0;
  double active_box_fraction = 0.0;
};

struct OptimizationReport {
  std::vector<IterationRecord> iterates;
  SpaceTimeControl final_control;
  StateTrajectory final_state;
  AdjointTrajectory final_adjoint;
  double final_cost = 0.0;
  bool converged = false;
  std::string termination_reason;
  StateSummary final_state_summary;
};

/// Projected gradient descent on the reduced cost over U_ad with Armijo
/// backtracking and a Barzilai-Borwein initial step, terminating on the
/// natural VI residual.
OptimizationReport optimize(const Discretization& d, const PotentialPair& pots, const Field& y0,
                            const TrackingData& data, const SpaceTimeControl& initial_guess,
                            const TimeGrid& grid, const OptimizeOptions& opts = {});

}  // namespace chbc
