#pragma once

#include <optional>
#include <vector>

#include "chbc/state.hpp"

namespace chbc {

/// Linearization coefficients along a base trajectory: lam_k = f''(y_k),
/// lam_gamma_k = f_Gamma''(y_gamma_k), k = 0..N.
struct CoefficientFields {
  std::vector<Field> lam;
  std::vector<BoundaryField> lam_gamma;
};

CoefficientFields build_coefficients(const PotentialPair& pots, const StateTrajectory& traj);

/// Solution of the linearized system: xi at t_0..t_N (xi_0 = 0), eta at
/// t_1..t_N.  The stepping is the exact derivative of the state stepping,
/// so xi is the directional derivative of the discrete control-to-state map.
struct LinearizedTrajectory {
  std::vector<Field> xi;
  std::vector<BoundaryField> xi_gamma;
  std::vector<Field> eta;
};

LinearizedTrajectory solve_linearized(const Discretization& d, const PotentialPair& pots,
                                      const CoefficientFields& coeffs, const Eigen::MatrixXd& h,
                                      const TimeGrid& grid, const NewtonOptions& opts = {});

/// Tracking targets and weights of the cost functional.  Empty target
/// containers mean the zero target.  Weights must be nonnegative and not
/// all zero.
struct TrackingData {
  std::vector<Field> z_Q;             // t_0..t_N or empty
  std::vector<BoundaryField> z_Sigma; // t_0..t_N or empty
  Field z_Omega;                      // final-time bulk target or empty
  BoundaryField z_Gamma;              // final-time boundary target or empty
  double bQ = 0.0, bSigma = 0.0, bOmega = 0.0, bGamma = 0.0, b0 = 0.0;

  void validate(const Discretization& d, const TimeGrid& grid) const;

  Field phi_Q(const Discretization& d, const StateTrajectory& traj, int k) const;
  BoundaryField phi_Sigma(const Discretization& d, const StateTrajectory& traj, int k) const;
  Field phi_Omega(const Discretization& d, const StateTrajectory& traj) const;
  BoundaryField phi_Gamma(const Discretization& d, const StateTrajectory& traj) const;
};

/// Compatibility couple for nonzero terminal weights: Phi must have zero
/// mean, trace(Phi) must equal phi_Gamma, and phi_Omega must equal
/// N(Phi) + mean(phi_Omega).
struct TerminalCouple {
  Field Phi;
};

/// Adjoint trajectory (p, q, q_gamma) stored at t_1..t_N (index k-1 holds
/// the fields at t_k), scaled so that the reduced gradient is
/// q_gamma + b0 u in the trapezoidal L2(Sigma) inner product.
/// The time-node-0 component of the gradient carries no adjoint part.
struct AdjointTrajectory {
  std::vector<Field> p;
  std::vector<Field> q;
  std::vector<BoundaryField> q_gamma;
};

/// Backward sweep that is the exact transpose of the linearized stepping;
/// the duality identity then holds to linear-solver precision.  Nonzero
/// bOmega/bGamma require a valid TerminalCouple and are rejected otherwise.
AdjointTrajectory solve_adjoint(const Discretization& d, const PotentialPair& pots,
                                const CoefficientFields& coeffs, const TrackingData& data,
                                const StateTrajectory& traj, const TimeGrid& grid,
                                const NewtonOptions& opts = {},
                                const TerminalCouple* terminal = nullptr);

/// |<q_gamma, h>_Sigma - (<phi_Q, xi>_Q + <phi_Sigma, xi_gamma>_Sigma
///  + (phi_Omega, xi(T)) + (phi_Gamma, xi_gamma(T)))| / (1 + |rhs|).
double duality_gap(const Discretization& d, const LinearizedTrajectory& lin,
                   const AdjointTrajectory& adj, const Eigen::MatrixXd& h,
                   const TrackingData& data, const StateTrajectory& traj,
                   const TimeGrid& grid);

}  // namespace chbc
