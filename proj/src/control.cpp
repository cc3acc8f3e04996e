#include "chbc/control.hpp"

#include <cmath>
#include <sstream>

#include "chbc/quadrature.hpp"

namespace chbc {

double evaluate_cost(const Discretization& d, const StateTrajectory& traj,
                     const SpaceTimeControl& u, const TrackingData& data, const TimeGrid& grid) {
  data.validate(d, grid);
  require(static_cast<int>(traj.y.size()) == grid.steps + 1,
          "evaluate_cost: trajectory does not match the time grid");
  require(u.values.cols() == grid.steps + 1, "evaluate_cost: control does not match the grid");

  double acc = 0.0;
  if (data.bQ > 0.0) {
    double s = 0.0;
    for (int k = 0; k <= grid.steps; ++k) {
      const Field dy = data.z_Q.empty() ? traj.y[k] : Field(traj.y[k] - data.z_Q[k]);
      s += grid.weight(k) * dy.dot(d.M_diag.cwiseProduct(dy));
    }
    acc += 0.5 * data.bQ * s;
  }
  if (data.bSigma > 0.0) {
    double s = 0.0;
    for (int k = 0; k <= grid.steps; ++k) {
      const BoundaryField dg =
          data.z_Sigma.empty() ? traj.y_gamma[k] : BoundaryField(traj.y_gamma[k] - data.z_Sigma[k]);
      s += grid.weight(k) * dg.dot(d.Mb_diag.cwiseProduct(dg));
    }
    acc += 0.5 * data.bSigma * s;
  }
  if (data.bOmega > 0.0) {
    const Field dy = data.z_Omega.size() ? Field(traj.y.back() - data.z_Omega) : traj.y.back();
    acc += 0.5 * data.bOmega * dy.dot(d.M_diag.cwiseProduct(dy));
  }
  if (data.bGamma > 0.0) {
    const BoundaryField dg = data.z_Gamma.size()
                                 ? BoundaryField(traj.y_gamma.back() - data.z_Gamma)
                                 : traj.y_gamma.back();
    acc += 0.5 * data.bGamma * dg.dot(d.Mb_diag.cwiseProduct(dg));
  }
  if (data.b0 > 0.0) acc += 0.5 * data.b0 * sigma_inner(d, grid, u.values, u.values);
  return acc;
}

Eigen::MatrixXd reduced_gradient(const AdjointTrajectory& adj, const SpaceTimeControl& u,
                                 double b0) {
  const int cols = static_cast<int>(u.values.cols());
  require(static_cast<int>(adj.q_gamma.size()) == cols - 1,
          "reduced_gradient: adjoint does not match the control grid");
  Eigen::MatrixXd g = b0 * u.values;
  for (int k = 1; k < cols; ++k) {
    require(adj.q_gamma[k - 1].size() == u.values.rows(),
            "reduced_gradient: boundary size mismatch");
    g.col(k) += adj.q_gamma[k - 1];
  }
  return g;
}

Eigen::MatrixXd project_box(const Eigen::MatrixXd& values, const Eigen::MatrixXd& lo,
                            const Eigen::MatrixXd& hi) {
  require(lo.rows() == values.rows() && lo.cols() == values.cols() && hi.rows() == values.rows() &&
              hi.cols() == values.cols(),
          "project_box: shape mismatch");
  require((lo.array() <= hi.array()).all(), "project_box: inconsistent box");
  return values.cwiseMax(lo).cwiseMin(hi);
}

namespace {

// Solves (diag(a) + mu/tau * L) v = diag(a) u per boundary node, where L is
// the path-graph Laplacian of the time chain (Thomas algorithm).
Eigen::VectorXd damped_node_solve(const Eigen::VectorXd& a, double mu_over_tau,
                                  const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd diag(n), rhs(n);
  for (int k = 0; k < n; ++k) {
    const double deg = (k == 0 || k == n - 1) ? 1.0 : 2.0;
    diag[k] = a[k] + mu_over_tau * deg;
    rhs[k] = a[k] * u[k];
  }
  const double off = -mu_over_tau;
  // forward elimination
  Eigen::VectorXd c(n);
  c[0] = off / diag[0];
  rhs[0] /= diag[0];
  for (int k = 1; k < n; ++k) {
    const double m = diag[k] - off * c[k - 1];
    c[k] = off / m;
    rhs[k] = (rhs[k] - off * rhs[k - 1]) / m;
  }
  for (int k = n - 2; k >= 0; --k) rhs[k] -= c[k] * rhs[k + 1];
  return rhs;
}

}  // namespace

Eigen::MatrixXd project_derivative_ball(const Discretization& d, const TimeGrid& g,
                                        const Eigen::MatrixXd& values, double M0, double tol) {
  require(M0 > 0.0, "project_derivative_ball: M0 must be positive");
  if (std::isinf(M0)) return values;
  if (sigma_dt_norm(d, g, values) <= M0) return values;

  Eigen::VectorXd a(g.steps + 1);
  for (int k = 0; k <= g.steps; ++k) a[k] = g.weight(k);

  auto constrained_norm = [&](double mu, Eigen::MatrixXd& out) {
    out.resize(values.rows(), values.cols());
    for (int b = 0; b < values.rows(); ++b)
      out.row(b) = damped_node_solve(a, mu / g.tau(), values.row(b).transpose()).transpose();
    return sigma_dt_norm(d, g, out);
  };

  // ||D v(mu)|| decreases monotonically from the unconstrained value to 0.
  Eigen::MatrixXd v;
  double lo = 0.0, hi = 1.0;
  while (constrained_norm(hi, v) > M0) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e30) throw SolverError("project_derivative_ball: dual bracket failed");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double norm = constrained_norm(mid, v);
    if (std::abs(norm - M0) <= tol * std::max(1.0, M0)) return v;
    (norm > M0 ? lo : hi) = mid;
  }
  constrained_norm(0.5 * (lo + hi), v);
  return v;
}

AdmissibleProjection project_admissible(const Discretization& d, const TimeGrid& g,
                                        const Eigen::MatrixXd& values, const Eigen::MatrixXd& lo,
                                        const Eigen::MatrixXd& hi, double M0, double tol,
                                        int max_sweeps) {
  AdmissibleProjection res;
  if (std::isinf(M0)) {
    res.values = project_box(values, lo, hi);
    res.converged = true;
    res.sweeps = 1;
    return res;
  }

  const double scale = 1.0 + sigma_norm(d, g, values);
  Eigen::MatrixXd x = values;
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(values.rows(), values.cols());
  Eigen::MatrixXd q = p;

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    const Eigen::MatrixXd y = project_box(x + p, lo, hi);
    p = x + p - y;
    const Eigen::MatrixXd x_new = project_derivative_ball(d, g, y + q, M0);
    q = y + q - x_new;
    const double change = sigma_norm(d, g, x_new - x);
    x = x_new;
    res.sweeps = sweep;
    if (change <= tol * scale) {
      res.converged = true;
      break;
    }
  }
  res.values = x;
  return res;
}

double vi_residual(const Discretization& d, const TimeGrid& g, const SpaceTimeControl& u,
                   const Eigen::MatrixXd& grad) {
  const AdmissibleProjection proj =
      project_admissible(d, g, u.values - grad, u.u_min, u.u_max, u.M0);
  return sigma_norm(d, g, u.values - proj.values);
}

namespace {

double active_box_fraction(const SpaceTimeControl& u) {
  const auto& v = u.values;
  int active = 0;
  for (int c = 0; c < v.cols(); ++c) {
    for (int r = 0; r < v.rows(); ++r) {
      const double lo = u.u_min(r, c), hi = u.u_max(r, c);
      if ((std::isfinite(lo) && v(r, c) <= lo + 1e-12) ||
          (std::isfinite(hi) && v(r, c) >= hi - 1e-12))
        ++active;
    }
  }
  return static_cast<double>(active) / static_cast<double>(v.size());
}

}  // namespace

OptimizationReport optimize(const Discretization& d, const PotentialPair& pots, const Field& y0,
                            const TrackingData& data, const SpaceTimeControl& initial_guess,
                            const TimeGrid& grid, const OptimizeOptions& opts) {
  data.validate(d, grid);
  require(data.bOmega == 0.0 && data.bGamma == 0.0,
          "optimize: nonzero terminal weights require the terminal compatibility couple "
          "(Phi, phi_Gamma); the optimizer supports only bOmega = bGamma = 0");
  require(initial_guess.box_consistent(), "optimize: inconsistent control box");

  OptimizationReport rep;
  SpaceTimeControl u = initial_guess;
  {
    const AdmissibleProjection proj =
        project_admissible(d, grid, u.values, u.u_min, u.u_max, u.M0, opts.dykstra_tol,
                           opts.dykstra_max_sweeps);
    u.values = proj.values;
  }

  auto state_and_cost = [&](const SpaceTimeControl& uc, StateTrajectory& traj) {
    traj = solve_state(d, pots, y0, uc, grid, opts.newton);
    return evaluate_cost(d, traj, uc, data, grid);
  };
  auto gradient_at = [&](const SpaceTimeControl& uc, const StateTrajectory& traj,
                         AdjointTrajectory& adj) {
    const CoefficientFields coeffs = build_coefficients(pots, traj);
    adj = solve_adjoint(d, pots, coeffs, data, traj, grid, opts.newton);
    return reduced_gradient(adj, uc, data.b0);
  };

  StateTrajectory traj;
  double cost = state_and_cost(u, traj);
  AdjointTrajectory adj;
  Eigen::MatrixXd g = gradient_at(u, traj, adj);
  double vi = vi_residual(d, grid, u, g);

  rep.iterates.push_back({0, cost, sigma_norm(d, grid, g), 0.0, vi, active_box_fraction(u)});

  double step = std::clamp(1.0, opts.step_min, opts.step_max);
  bool converged = vi <= opts.vi_tol;
  std::string reason = converged ? "vi-residual converged at the initial point" : "";

  for (int iter = 1; iter <= opts.max_iter && !converged; ++iter) {
    SpaceTimeControl u_try = u;
    StateTrajectory traj_try;
    double cost_try = 0.0;
    double delta_norm = 0.0;
    bool accepted = false;

    double s = step;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      const AdmissibleProjection proj =
          project_admissible(d, grid, u.values - s * g, u.u_min, u.u_max, u.M0,
                             opts.dykstra_tol, opts.dykstra_max_sweeps);
      u_try.values = proj.values;
      delta_norm = sigma_norm(d, grid, u_try.values - u.values);
      if (delta_norm == 0.0) break;  // stationary within projection tolerance
      bool solved = true;
      try {
        cost_try = state_and_cost(u_try, traj_try);
      } catch (const StepFailure&) {
        solved = false;  // reject the trial step, try a shorter one
      }
      if (solved && cost_try <= cost - (opts.armijo_sigma / s) * delta_norm * delta_norm) {
        accepted = true;
        break;
      }
      s *= opts.backtrack_factor;
    }

    if (!accepted) {
      if (delta_norm == 0.0) {
        // The projected step does not move: re-measure stationarity and stop.
        vi = vi_residual(d, grid, u, g);
        converged = vi <= opts.vi_tol;
        reason = converged ? "vi-residual converged (projection fixed point)"
                           : "projected step stalled before reaching the VI tolerance";
      } else {
        reason = "line search failed; returning the best iterate";
      }
      rep.iterates.push_back(
          {static_cast<int>(rep.iterates.size()), cost, sigma_norm(d, grid, g), 0.0, vi,
           active_box_fraction(u)});
      break;
    }

    AdjointTrajectory adj_try;
    const Eigen::MatrixXd g_new = gradient_at(u_try, traj_try, adj_try);

    // Barzilai-Borwein step from the accepted pair, clamped.
    const Eigen::MatrixXd du = u_try.values - u.values;
    const Eigen::MatrixXd dg = g_new - g;
    const double dudg = sigma_inner(d, grid, du, dg);
    if (dudg > 0.0) {
      step = std::clamp(sigma_inner(d, grid, du, du) / dudg, opts.step_min, opts.step_max);
    } else {
      step = opts.step_max;
    }

    u = u_try;
    traj = std::move(traj_try);
    adj = std::move(adj_try);
    cost = cost_try;
    g = g_new;
    vi = vi_residual(d, grid, u, g);
    rep.iterates.push_back(
        {iter, cost, sigma_norm(d, grid, g), s, vi, active_box_fraction(u)});

    if (vi <= opts.vi_tol) {
      converged = true;
      reason = "vi-residual converged";
    }
  }

  if (reason.empty()) reason = "iteration cap reached";
  rep.final_control = u;
  rep.final_state = std::move(traj);
  rep.final_adjoint = std::move(adj);
  rep.final_cost = cost;
  rep.converged = converged;
  rep.termination_reason = reason;
  rep.final_state_summary = summarize_state(d, pots, rep.final_state);
  return rep;
}

}  // namespace chbc
