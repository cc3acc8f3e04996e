#include "chbc/state.hpp"

#include <cmath>
#include <sstream>

#include "chbc/neumann.hpp"
#include "chbc/quadrature.hpp"
#include "chbc/step_system.hpp"

namespace chbc {

SpaceTimeControl SpaceTimeControl::zero(const Discretization& d, const TimeGrid& g) {
  SpaceTimeControl u;
  u.values = Eigen::MatrixXd::Zero(d.boundary_nodes(), g.steps + 1);
  u.u_min = Eigen::MatrixXd::Constant(d.boundary_nodes(), g.steps + 1, -kInf);
  u.u_max = Eigen::MatrixXd::Constant(d.boundary_nodes(), g.steps + 1, kInf);
  u.M0 = kInf;
  return u;
}

void SpaceTimeControl::set_box(double lo, double hi) {
  require(lo <= hi, "SpaceTimeControl: u_min must not exceed u_max");
  u_min.setConstant(lo);
  u_max.setConstant(hi);
}

namespace {

Eigen::VectorXd apply_pointwise(const SplitPotential& s, const Eigen::VectorXd& v,
                                bool convex_part, int order) {
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i)
    out[i] = convex_part ? s.convex(v[i], order) : s.concave(v[i], order);
  return out;
}

struct StepWork {
  const Discretization& d;
  const SplitPair& split;
  double tau;

  // Residual of the coupled step equations at (y, w) given the previous
  // level (yk, ygk) and the control at the implicit level.
  Eigen::VectorXd residual(const Field& y, const Field& w, const Field& yk,
                           const BoundaryField& ygk, const Eigen::VectorXd& u_next) const {
    const int nb = d.bulk_nodes;
    const BoundaryField yg = d.trace(y);
    Eigen::VectorXd F(2 * nb);

    F.head(nb) = d.M_diag.cwiseProduct(y - yk) / tau + d.K * w;

    Eigen::VectorXd f2 = d.K * y;
    f2 += d.M_diag.cwiseProduct(apply_pointwise(split.bulk, y, true, 1) +
                                apply_pointwise(split.bulk, yk, false, 1));
    BoundaryField bres = d.Mb_diag.cwiseProduct(yg - ygk) / tau + d.Kb * yg;
    bres += d.Mb_diag.cwiseProduct(apply_pointwise(split.boundary, yg, true, 1) +
                                   apply_pointwise(split.boundary, ygk, false, 1) - u_next);
    f2 += d.lift_boundary(bres);
    f2 -= d.M_diag.cwiseProduct(w);
    F.tail(nb) = f2;
    return F;
  }

  SpMat jacobian(const Field& y) const {
    const BoundaryField yg = d.trace(y);
    return assemble_step_matrix(d, tau, apply_pointwise(split.bulk, y, true, 2),
                                apply_pointwise(split.boundary, yg, true, 2), false);
  }
};

}  // namespace

StateTrajectory solve_state(const Discretization& d, const PotentialPair& pots, const Field& y0,
                            const SpaceTimeControl& u, const TimeGrid& grid,
                            const NewtonOptions& opts) {
  grid.validate();
  require(y0.size() == d.bulk_nodes, "solve_state: y0 size mismatch");
  require(y0.allFinite(), "solve_state: y0 must be finite");
  require(u.values.rows() == d.boundary_nodes() && u.values.cols() == grid.steps + 1,
          "solve_state: control shape mismatch");
  require(u.values.allFinite(), "solve_state: control must be finite");
  require(opts.tol_abs > 0.0 && opts.max_iter >= 1, "solve_state: invalid Newton options");

  const SplitPair split = make_split(pots);
  const int nb = d.bulk_nodes;
  StepWork work{d, split, grid.tau()};

  StateTrajectory traj;
  traj.y.reserve(grid.steps + 1);
  traj.y_gamma.reserve(grid.steps + 1);
  traj.w.reserve(grid.steps);
  traj.y.push_back(y0);
  traj.y_gamma.push_back(d.trace(y0));
  traj.m0 = d.mean_value(y0);

  // Warm start for w: the value that makes the second equation hold at y0
  // with a frozen boundary time derivative.
  Field w_prev(nb);
  {
    const Field& yk = traj.y.back();
    const BoundaryField yg = traj.y_gamma.back();
    Eigen::VectorXd rhs = d.K * yk;
    rhs += d.M_diag.cwiseProduct(apply_pointwise(split.bulk, yk, true, 1) +
                                 apply_pointwise(split.bulk, yk, false, 1));
    BoundaryField bres = d.Kb * yg;
    bres += d.Mb_diag.cwiseProduct(apply_pointwise(split.boundary, yg, true, 1) +
                                   apply_pointwise(split.boundary, yg, false, 1) -
                                   u.values.col(1));
    rhs += d.lift_boundary(bres);
    w_prev = rhs.cwiseQuotient(d.M_diag);
  }

  for (int k = 0; k < grid.steps; ++k) {
    const Field& yk = traj.y[k];
    const BoundaryField& ygk = traj.y_gamma[k];
    const Eigen::VectorXd u_next = u.values.col(k + 1);

    Field y = yk;
    Field w = w_prev;
    Eigen::VectorXd F = work.residual(y, w, yk, ygk, u_next);
    double rnorm = F.norm();
    const double target = std::max(opts.tol_abs, opts.tol_rel * rnorm);

    int it = 0;
    bool converged = rnorm <= target;
    while (!converged && it < opts.max_iter) {
      const SpMat J = work.jacobian(y);
      const Eigen::VectorXd dx = solve_sparse(J, -F, opts.natural_ordering);

      double alpha = 1.0;
      Field y_try, w_try;
      Eigen::VectorXd F_try;
      double rnorm_try = kInf;
      int bt = 0;
      for (; bt <= opts.max_backtracks; ++bt) {
        y_try = y + alpha * dx.head(nb);
        w_try = w + alpha * dx.tail(nb);
        F_try = work.residual(y_try, w_try, yk, ygk, u_next);
        rnorm_try = F_try.norm();
        if (std::isfinite(rnorm_try) && rnorm_try < rnorm) break;
        alpha *= 0.5;
      }
      if (bt > opts.max_backtracks) {
        std::ostringstream os;
        os << "solve_state: Newton stalled at step " << k + 1 << " (residual " << rnorm << ")";
        throw StepFailure(os.str(), k + 1, it, rnorm);
      }
      y = y_try;
      w = w_try;
      F = F_try;
      rnorm = rnorm_try;
      ++it;
      converged = rnorm <= target;
    }
    if (!converged) {
      std::ostringstream os;
      os << "solve_state: Newton did not converge at step " << k + 1 << " after " << it
         << " iterations (residual " << rnorm << ")";
      throw StepFailure(os.str(), k + 1, it, rnorm);
    }
    if (!y.allFinite() || !w.allFinite())
      throw SolverError("solve_state: non-finite state encountered");

    traj.y.push_back(y);
    traj.y_gamma.push_back(d.trace(y));
    traj.w.push_back(w);
    w_prev = w;
  }
  return traj;
}

double free_energy(const Discretization& d, const PotentialPair& pots, const Field& y,
                   const BoundaryField& y_gamma) {
  require(y.size() == d.bulk_nodes, "free_energy: field size mismatch");
  const BoundaryField tr = d.trace(y);
  require((tr - y_gamma).cwiseAbs().maxCoeff() <=
              1e-12 * (1.0 + y.cwiseAbs().maxCoeff()),
          "free_energy: y_gamma must be the trace of y");

  double e = 0.5 * y.dot(d.K * y) + 0.5 * y_gamma.dot(d.Kb * y_gamma);
  for (int i = 0; i < d.bulk_nodes; ++i) e += d.M_diag[i] * pots.bulk.eval(y[i], 0);
  for (int b = 0; b < d.boundary_nodes(); ++b)
    e += d.Mb_diag[b] * pots.boundary.eval(y_gamma[b], 0);
  return e;
}

double continuous_dependence_ratio(const Discretization& d, const PotentialPair& pots,
                                   const Field& y0, const SpaceTimeControl& u1,
                                   const SpaceTimeControl& u2, const TimeGrid& grid,
                                   const NewtonOptions& opts) {
  const Eigen::MatrixXd du = u1.values - u2.values;
  require(du.cwiseAbs().maxCoeff() > 0.0,
          "continuous_dependence_ratio: controls must differ");

  const StateTrajectory t1 = solve_state(d, pots, y0, u1, grid, opts);
  const StateTrajectory t2 = solve_state(d, pots, y0, u2, grid, opts);
  const NeumannOperator neumann(d);

  double sup_dual = 0.0, sup_bdry = 0.0, grad_bulk = 0.0, grad_bdry = 0.0;
  for (int k = 0; k <= grid.steps; ++k) {
    Field dy = t1.y[k] - t2.y[k];
    dy.array() -= d.mean_value(dy);  // same initial mean; strip roundoff
    sup_dual = std::max(sup_dual, neumann.dual_norm(dy));
    const BoundaryField dg = t1.y_gamma[k] - t2.y_gamma[k];
    sup_bdry = std::max(sup_bdry, std::sqrt(dg.dot(d.Mb_diag.cwiseProduct(dg))));
    grad_bulk += grid.weight(k) * dy.dot(d.K * dy);
    grad_bdry += grid.weight(k) * dg.dot(d.Kb * dg);
  }
  const double aggregate =
      sup_dual + sup_bdry + std::sqrt(grad_bulk) + std::sqrt(grad_bdry);
  return aggregate / sigma_norm(d, grid, du);
}

StateSummary summarize_state(const Discretization& d, const PotentialPair& pots,
                             const StateTrajectory& traj) {
  StateSummary s;
  double prev_e = 0.0;
  for (std::size_t k = 0; k < traj.y.size(); ++k) {
    s.mass_drift = std::max(s.mass_drift, std::abs(d.mean_value(traj.y[k]) - traj.m0));
    s.max_abs_y = std::max(s.max_abs_y, traj.y[k].cwiseAbs().maxCoeff());
    const double e = free_energy(d, pots, traj.y[k], traj.y_gamma[k]);
    if (k == 0) {
      s.initial_energy = e;
    } else {
      s.max_energy_increase = std::max(s.max_energy_increase, e - prev_e);
    }
    s.final_energy = e;
    prev_e = e;
  }
  return s;
}

}  // namespace chbc
