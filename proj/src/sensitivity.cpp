#include "chbc/sensitivity.hpp"

#include <cmath>
#include <sstream>

#include "chbc/neumann.hpp"
#include "chbc/step_system.hpp"

namespace chbc {

CoefficientFields build_coefficients(const PotentialPair& pots, const StateTrajectory& traj) {
  CoefficientFields c;
  c.lam.reserve(traj.y.size());
  c.lam_gamma.reserve(traj.y_gamma.size());
  for (const Field& y : traj.y) {
    require(y.allFinite(), "build_coefficients: trajectory must be finite");
    Field l(y.size());
    for (int i = 0; i < y.size(); ++i) l[i] = pots.bulk.eval(y[i], 2);
    c.lam.push_back(std::move(l));
  }
  for (const BoundaryField& g : traj.y_gamma) {
    BoundaryField l(g.size());
    for (int b = 0; b < g.size(); ++b) l[b] = pots.boundary.eval(g[b], 2);
    c.lam_gamma.push_back(std::move(l));
  }
  return c;
}

namespace {

void check_coeffs(const Discretization& d, const CoefficientFields& coeffs,
                  const TimeGrid& grid) {
  require(static_cast<int>(coeffs.lam.size()) == grid.steps + 1 &&
              static_cast<int>(coeffs.lam_gamma.size()) == grid.steps + 1,
          "coefficient fields do not match the time grid");
  require(coeffs.lam[0].size() == d.bulk_nodes &&
              coeffs.lam_gamma[0].size() == d.boundary_nodes(),
          "coefficient fields do not match the mesh");
}

}  // namespace

LinearizedTrajectory solve_linearized(const Discretization& d, const PotentialPair& pots,
                                      const CoefficientFields& coeffs, const Eigen::MatrixXd& h,
                                      const TimeGrid& grid, const NewtonOptions& opts) {
  grid.validate();
  check_coeffs(d, coeffs, grid);
  require(h.rows() == d.boundary_nodes() && h.cols() == grid.steps + 1,
          "solve_linearized: increment shape mismatch");

  const SplitPair split = make_split(pots);
  const double rho = split.bulk.rho;
  const double rho_b = split.boundary.rho;
  const double tau = grid.tau();
  const int nb = d.bulk_nodes;

  LinearizedTrajectory lin;
  lin.xi.push_back(Field::Zero(nb));
  lin.xi_gamma.push_back(BoundaryField::Zero(d.boundary_nodes()));

  for (int k = 0; k < grid.steps; ++k) {
    // Implicit coefficient f_cx'' = lam + rho at the new level; the explicit
    // concave part contributes rho * xi_k on the right-hand side.
    const Field a_bulk = coeffs.lam[k + 1].array() + rho;
    const BoundaryField a_bdry = coeffs.lam_gamma[k + 1].array() + rho_b;
    const SpMat J = assemble_step_matrix(d, tau, a_bulk, a_bdry, false);

    Eigen::VectorXd rhs(2 * nb);
    rhs.head(nb) = d.M_diag.cwiseProduct(lin.xi[k]) / tau;
    Eigen::VectorXd r2 = rho * d.M_diag.cwiseProduct(lin.xi[k]);
    r2 += d.lift_boundary(d.Mb_diag.cwiseProduct(
        lin.xi_gamma[k] / tau + rho_b * lin.xi_gamma[k] + h.col(k + 1)));
    rhs.tail(nb) = r2;

    const Eigen::VectorXd x = solve_sparse(J, rhs, opts.natural_ordering);
    lin.xi.push_back(x.head(nb));
    lin.xi_gamma.push_back(d.trace(lin.xi.back()));
    lin.eta.push_back(x.tail(nb));
  }
  return lin;
}

void TrackingData::validate(const Discretization& d, const TimeGrid& grid) const {
  require(bQ >= 0 && bSigma >= 0 && bOmega >= 0 && bGamma >= 0 && b0 >= 0,
          "TrackingData: weights must be nonnegative");
  require(bQ + bSigma + bOmega + bGamma + b0 > 0.0,
          "TrackingData: weights must not all be zero");
  if (!z_Q.empty()) {
    require(static_cast<int>(z_Q.size()) == grid.steps + 1 && z_Q[0].size() == d.bulk_nodes,
            "TrackingData: z_Q shape mismatch");
  }
  if (!z_Sigma.empty()) {
    require(static_cast<int>(z_Sigma.size()) == grid.steps + 1 &&
                z_Sigma[0].size() == d.boundary_nodes(),
            "TrackingData: z_Sigma shape mismatch");
  }
  if (z_Omega.size() > 0)
    require(z_Omega.size() == d.bulk_nodes, "TrackingData: z_Omega size mismatch");
  if (z_Gamma.size() > 0)
    require(z_Gamma.size() == d.boundary_nodes(), "TrackingData: z_Gamma size mismatch");
}

Field TrackingData::phi_Q(const Discretization& d, const StateTrajectory& traj, int k) const {
  if (bQ == 0.0) return Field::Zero(d.bulk_nodes);
  if (z_Q.empty()) return bQ * traj.y[k];
  return bQ * (traj.y[k] - z_Q[k]);
}

BoundaryField TrackingData::phi_Sigma(const Discretization& d, const StateTrajectory& traj,
                                      int k) const {
  if (bSigma == 0.0) return BoundaryField::Zero(d.boundary_nodes());
  if (z_Sigma.empty()) return bSigma * traj.y_gamma[k];
  return bSigma * (traj.y_gamma[k] - z_Sigma[k]);
}

Field TrackingData::phi_Omega(const Discretization& d, const StateTrajectory& traj) const {
  if (bOmega == 0.0) return Field::Zero(d.bulk_nodes);
  if (z_Omega.size() == 0) return bOmega * traj.y.back();
  return bOmega * (traj.y.back() - z_Omega);
}

BoundaryField TrackingData::phi_Gamma(const Discretization& d,
                                      const StateTrajectory& traj) const {
  if (bGamma == 0.0) return BoundaryField::Zero(d.boundary_nodes());
  if (z_Gamma.size() == 0) return bGamma * traj.y_gamma.back();
  return bGamma * (traj.y_gamma.back() - z_Gamma);
}

AdjointTrajectory solve_adjoint(const Discretization& d, const PotentialPair& pots,
                                const CoefficientFields& coeffs, const TrackingData& data,
                                const StateTrajectory& traj, const TimeGrid& grid,
                                const NewtonOptions& opts, const TerminalCouple* terminal) {
  grid.validate();
  check_coeffs(d, coeffs, grid);
  data.validate(d, grid);
  require(static_cast<int>(traj.y.size()) == grid.steps + 1,
          "solve_adjoint: trajectory does not match the time grid");

  const Field phi_omega = data.phi_Omega(d, traj);
  const BoundaryField phi_gamma = data.phi_Gamma(d, traj);

  if (data.bOmega > 0.0 || data.bGamma > 0.0) {
    // Terminal data must satisfy the compatibility condition: a zero-mean
    // couple (Phi, phi_Gamma) with phi_Omega = N(Phi) + mean(phi_Omega).
    require(terminal != nullptr,
            "solve_adjoint: nonzero bOmega/bGamma require a compatibility couple "
            "(Phi, phi_Gamma) with phi_Omega = N(Phi) + mean; none was supplied");
    require(terminal->Phi.size() == d.bulk_nodes, "solve_adjoint: Phi size mismatch");
    const double phi_scale = 1.0 + terminal->Phi.cwiseAbs().maxCoeff();
    require(std::abs(d.mean_value(terminal->Phi)) <= 1e-10 * phi_scale,
            "solve_adjoint: Phi must have zero mean value");

    const double tol = 1e-8 * (1.0 + phi_gamma.cwiseAbs().maxCoeff() +
                               phi_omega.cwiseAbs().maxCoeff());
    const BoundaryField trace_err = d.trace(terminal->Phi) - phi_gamma;
    require(data.bGamma == 0.0 || trace_err.cwiseAbs().maxCoeff() <= tol,
            "solve_adjoint: trace(Phi) does not match phi_Gamma");
    if (data.bOmega > 0.0) {
      NeumannOperator neumann(d);
      Field recon = neumann.solve(terminal->Phi);
      recon.array() += d.mean_value(phi_omega);
      require((recon - phi_omega).cwiseAbs().maxCoeff() <= tol,
              "solve_adjoint: phi_Omega is not N(Phi) + mean; terminal data incompatible");
    }
  }

  const SplitPair split = make_split(pots);
  const double rho = split.bulk.rho;
  const double rho_b = split.boundary.rho;
  const double tau = grid.tau();
  const int nb = d.bulk_nodes;
  const int N = grid.steps;

  AdjointTrajectory adj;
  adj.p.assign(N, Field());
  adj.q.assign(N, Field());
  adj.q_gamma.assign(N, BoundaryField());

  // Unscaled multipliers of the two step equations, initialized past the end.
  Field P = Field::Zero(nb);
  Field Q = Field::Zero(nb);

  for (int k = N; k >= 1; --k) {
    const Field a_bulk = coeffs.lam[k].array() + rho;
    const BoundaryField a_bdry = coeffs.lam_gamma[k].array() + rho_b;
    const SpMat Jt = assemble_step_matrix(d, tau, a_bulk, a_bdry, true);

    Eigen::VectorXd rhs(2 * nb);
    Eigen::VectorXd c = grid.weight(k) * d.M_diag.cwiseProduct(data.phi_Q(d, traj, k));
    c += grid.weight(k) *
         d.lift_boundary(d.Mb_diag.cwiseProduct(data.phi_Sigma(d, traj, k)));
    if (k == N) {
      c += d.M_diag.cwiseProduct(phi_omega);
      c += d.lift_boundary(d.Mb_diag.cwiseProduct(phi_gamma));
    }
    c += d.M_diag.cwiseProduct(P) / tau;
    c += rho * d.M_diag.cwiseProduct(Q);
    const BoundaryField Qg = d.trace(Q);
    c += d.lift_boundary(d.Mb_diag.cwiseProduct(Qg / tau + rho_b * Qg));
    rhs.head(nb) = c;
    rhs.tail(nb).setZero();

    const Eigen::VectorXd x = solve_sparse(Jt, rhs, opts.natural_ordering);
    P = x.head(nb);
    Q = x.tail(nb);

    const double scale = grid.weight(k);
    adj.p[k - 1] = P / scale;
    adj.q[k - 1] = Q / scale;
    adj.q_gamma[k - 1] = d.trace(adj.q[k - 1]);
  }
  return adj;
}

double duality_gap(const Discretization& d, const LinearizedTrajectory& lin,
                   const AdjointTrajectory& adj, const Eigen::MatrixXd& h,
                   const TrackingData& data, const StateTrajectory& traj,
                   const TimeGrid& grid) {
  const int N = grid.steps;
  require(static_cast<int>(lin.xi.size()) == N + 1 &&
              static_cast<int>(adj.q_gamma.size()) == N &&
              static_cast<int>(traj.y.size()) == N + 1,
          "duality_gap: trajectories do not match the time grid");
  require(h.rows() == d.boundary_nodes() && h.cols() == N + 1,
          "duality_gap: increment shape mismatch");

  double lhs = 0.0;
  for (int k = 1; k <= N; ++k)
    lhs += grid.weight(k) * adj.q_gamma[k - 1].dot(d.Mb_diag.cwiseProduct(h.col(k)));

  double rhs = 0.0;
  for (int k = 0; k <= N; ++k) {
    rhs += grid.weight(k) * data.phi_Q(d, traj, k).dot(d.M_diag.cwiseProduct(lin.xi[k]));
    rhs += grid.weight(k) *
           data.phi_Sigma(d, traj, k).dot(d.Mb_diag.cwiseProduct(lin.xi_gamma[k]));
  }
  rhs += data.phi_Omega(d, traj).dot(d.M_diag.cwiseProduct(lin.xi[N]));
  rhs += data.phi_Gamma(d, traj).dot(d.Mb_diag.cwiseProduct(lin.xi_gamma[N]));

  return std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
}

}  // namespace chbc
