#include <doctest.h>

#include <cmath>
#include <random>

#include "chbc/control.hpp"
#include "chbc/quadrature.hpp"
#include "chbc/verification.hpp"

using namespace chbc;

namespace {

Field cosine_datum(const Discretization& d, double amp) {
  Field y0(d.bulk_nodes);
  for (int i = 0; i < d.bulk_nodes; ++i) y0[i] = amp * std::cos(M_PI * d.coords(i, 0));
  return y0;
}

}  // namespace

TEST_CASE("cost: perfect tracking at zero control costs nothing") {
  const Discretization d = build_interval_mesh(8);
  const TimeGrid grid{0.01, 10};
  const PotentialPair pots = regular_double_well();
  const SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
  const StateTrajectory traj = solve_state(d, pots, cosine_datum(d, 0.1), u, grid);

  TrackingData data;
  data.bQ = 1.0;
  data.bSigma = 2.0;
  data.bOmega = 0.5;
  data.bGamma = 0.5;
  data.z_Q.assign(traj.y.begin(), traj.y.end());
  data.z_Sigma.assign(traj.y_gamma.begin(), traj.y_gamma.end());
  data.z_Omega = traj.y.back();
  data.z_Gamma = traj.y_gamma.back();
  CHECK(evaluate_cost(d, traj, u, data, grid) == 0.0);
}

TEST_CASE("cost: pure control penalty of the unit control over Sigma") {
  const Discretization d = build_interval_mesh(8);
  const TimeGrid grid{1.0, 10};
  const PotentialPair pots = regular_double_well();
  SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
  u.values.setConstant(1.0);
  const StateTrajectory traj = solve_state(d, pots, Field::Zero(d.bulk_nodes), u, grid);

  TrackingData data;
  data.b0 = 1.0;
  // (b0/2) * |Gamma| * T = 0.5 * 2 * 1
  CHECK(evaluate_cost(d, traj, u, data, grid) == doctest::Approx(1.0).epsilon(1e-13));

  SpaceTimeControl u2 = u;
  u2.values *= 2.0;
  const StateTrajectory traj2 = solve_state(d, pots, Field::Zero(d.bulk_nodes), u2, grid);
  CHECK(evaluate_cost(d, traj2, u2, data, grid) == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("weights must not all be zero") {
  const Discretization d = build_interval_mesh(8);
  const TimeGrid grid{0.01, 10};
  TrackingData data;  // all weights zero
  CHECK_THROWS_AS(data.validate(d, grid), std::invalid_argument);
}

TEST_CASE("reduced gradient composes the adjoint trace and the penalty") {
  const Discretization d = build_interval_mesh(8);
  const TimeGrid grid{0.01, 4};
  SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
  u.values.setRandom();

  AdjointTrajectory zero_adj;
  zero_adj.q_gamma.assign(grid.steps, BoundaryField::Zero(d.boundary_nodes()));
  const Eigen::MatrixXd g1 = reduced_gradient(zero_adj, u, 1.0);
  CHECK((g1 - u.values).cwiseAbs().maxCoeff() == 0.0);

  AdjointTrajectory adj;
  adj.q_gamma.assign(grid.steps, BoundaryField::Constant(d.boundary_nodes(), 0.7));
  const Eigen::MatrixXd g2 = reduced_gradient(adj, u, 0.0);
  CHECK(g2.col(0).cwiseAbs().maxCoeff() == 0.0);  // no adjoint part at t_0
  for (int k = 1; k <= grid.steps; ++k)
    CHECK((g2.col(k).array() - 0.7).abs().maxCoeff() == 0.0);
}

TEST_CASE("box projection: fixed point, saturation, idempotence") {
  Eigen::MatrixXd u(2, 3), lo(2, 3), hi(2, 3);
  lo.setConstant(-1.0);
  hi.setConstant(1.0);
  u.setConstant(0.5);
  CHECK((project_box(u, lo, hi) - u).cwiseAbs().maxCoeff() == 0.0);
  u.setConstant(5.0);
  const Eigen::MatrixXd p = project_box(u, lo, hi);
  CHECK((p.array() - 1.0).abs().maxCoeff() == 0.0);
  CHECK((project_box(p, lo, hi) - p).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd bad_lo = lo;
  bad_lo.setConstant(2.0);
  CHECK_THROWS_AS(project_box(u, bad_lo, hi), std::invalid_argument);
}

TEST_CASE("derivative-ball projection: inactive cases are the identity") {
  const Discretization d = build_interval_mesh(4);
  const TimeGrid grid{1.0, 5};
  Eigen::MatrixXd u(2, 6);
  u.setConstant(3.0);  // time-constant: zero derivative
  CHECK((project_derivative_ball(d, grid, u, 0.1) - u).cwiseAbs().maxCoeff() == 0.0);
  u.setRandom();
  CHECK((project_derivative_ball(d, grid, u, kInf) - u).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(project_derivative_ball(d, grid, u, 0.0), std::invalid_argument);
}

TEST_CASE("projection suites pass against the dense QP oracle") {
  Rng rng(99);
  for (const auto& r : verify::projection_suite(rng)) {
    INFO(r.name, ": ", r.value, " vs ", r.threshold);
    CHECK(r.pass);
  }
}

TEST_CASE("admissible projection is a fixed point on admissible controls") {
  const Discretization d = build_interval_mesh(4);
  const TimeGrid grid{1.0, 5};
  Eigen::MatrixXd lo = Eigen::MatrixXd::Constant(2, 6, -1.0);
  Eigen::MatrixXd hi = Eigen::MatrixXd::Constant(2, 6, 1.0);
  Eigen::MatrixXd u = Eigen::MatrixXd::Constant(2, 6, 0.25);
  const AdmissibleProjection p = project_admissible(d, grid, u, lo, hi, 1.0);
  CHECK(p.converged);
  CHECK(p.sweeps == 1);
  CHECK((p.values - u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vi residual distinguishes stationary from non-stationary points") {
  const Discretization d = build_interval_mesh(4);
  const TimeGrid grid{1.0, 5};
  SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
  u.set_box(-1.0, 1.0);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 6);
  CHECK(vi_residual(d, grid, u, zero) == 0.0);
  Eigen::MatrixXd g = zero;
  g.setConstant(0.3);
  CHECK(vi_residual(d, grid, u, g) > 0.0);
}

TEST_CASE("gradient matches central finite differences of the reduced cost") {
  const Discretization d = build_interval_mesh(16);
  const TimeGrid grid{0.02, 20};
  const PotentialPair pots = regular_double_well();
  const Field y0 = cosine_datum(d, 0.1);
  TrackingData data;
  data.bQ = 1.0;
  data.b0 = 1e-2;
  SpaceTimeControl box = SpaceTimeControl::zero(d, grid);
  box.set_box(-1.0, 1.0);
  Rng rng(7);
  for (const auto& r :
       verify::gradient_suite(d, pots, y0, data, box, grid, NewtonOptions{}, rng)) {
    INFO(r.name, ": ", r.value);
    CHECK(r.pass);
  }
}

TEST_CASE("optimizer stops immediately at a stationary start") {
  const Discretization d = build_interval_mesh(16);
  const TimeGrid grid{0.02, 20};
  const PotentialPair pots = regular_double_well();
  const Field y0 = cosine_datum(d, 0.1);
  const SpaceTimeControl u0 = [&] {
    SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
    u.set_box(-1.0, 1.0);
    return u;
  }();

  // Track the uncontrolled trajectory itself: zero control is optimal.
  const StateTrajectory free_run = solve_state(d, pots, y0, u0, grid);
  TrackingData data;
  data.bQ = 1.0;
  data.b0 = 1e-2;
  data.z_Q.assign(free_run.y.begin(), free_run.y.end());

  const OptimizationReport rep = optimize(d, pots, y0, data, u0, grid);
  CHECK(rep.converged);
  CHECK(rep.iterates.size() == 1);
  CHECK(rep.final_control.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("optimizer rejects nonzero terminal weights") {
  const Discretization d = build_interval_mesh(8);
  const TimeGrid grid{0.01, 10};
  TrackingData data;
  data.bQ = 1.0;
  data.bOmega = 1.0;
  const SpaceTimeControl u0 = SpaceTimeControl::zero(d, grid);
  CHECK_THROWS_AS(optimize(d, regular_double_well(), Field::Zero(d.bulk_nodes), data, u0, grid),
                  std::invalid_argument);
}

TEST_CASE("optimizer drives the canonical problem to stationarity") {
  const Discretization d = build_interval_mesh(16);
  const TimeGrid grid{0.05, 50};
  const PotentialPair pots = regular_double_well();
  const Field y0 = cosine_datum(d, 0.1);

  TrackingData data;
  data.bQ = 1.0;
  data.b0 = 1e-2;

  SpaceTimeControl u0 = SpaceTimeControl::zero(d, grid);
  u0.set_box(-1.0, 1.0);

  OptimizeOptions opts;
  opts.vi_tol = 1e-8;
  const OptimizationReport rep = optimize(d, pots, y0, data, u0, grid, opts);

  REQUIRE(rep.converged);
  CHECK(rep.iterates.back().vi_residual <= 1e-6);

  // monotone cost decrease, strictly below the uncontrolled cost
  for (std::size_t j = 1; j < rep.iterates.size(); ++j)
    CHECK(rep.iterates[j].cost <= rep.iterates[j - 1].cost + 1e-14);
  const StateTrajectory free_run = solve_state(d, pots, y0, u0, grid);
  CHECK(rep.final_cost < evaluate_cost(d, free_run, u0, data, grid));

  // feasibility of every recorded control bound
  CHECK(rep.final_control.values.maxCoeff() <= 1.0 + 1e-12);
  CHECK(rep.final_control.values.minCoeff() >= -1.0 - 1e-12);

  // the final control is the box clamp of -q_gamma / b0
  Eigen::MatrixXd clamp_target(d.boundary_nodes(), grid.steps + 1);
  clamp_target.col(0).setZero();
  for (int k = 1; k <= grid.steps; ++k)
    clamp_target.col(k) = -rep.final_adjoint.q_gamma[k - 1] / data.b0;
  clamp_target = project_box(clamp_target, rep.final_control.u_min, rep.final_control.u_max);
  CHECK(sigma_norm(d, grid, rep.final_control.values - clamp_target) <= 1e-5);

  // normal-cone check at termination against random feasible candidates
  const Eigen::MatrixXd g = reduced_gradient(rep.final_adjoint, rep.final_control, data.b0);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd v(d.boundary_nodes(), grid.steps + 1);
    for (int c = 0; c < v.cols(); ++c)
      for (int r = 0; r < v.rows(); ++r) v(r, c) = dist(rng);
    CHECK(sigma_inner(d, grid, g, v - rep.final_control.values) >= -1e-8);
  }
}

TEST_CASE("optimizer keeps iterates feasible when the derivative bound is active") {
  const Discretization d = build_interval_mesh(16);
  const TimeGrid grid{0.05, 50};
  const PotentialPair pots = regular_double_well();
  const Field y0 = cosine_datum(d, 0.1);

  TrackingData data;
  data.bQ = 1.0;
  data.b0 = 1e-3;  // weak penalty invites a fast-moving control

  SpaceTimeControl u0 = SpaceTimeControl::zero(d, grid);
  u0.set_box(-1.0, 1.0);
  u0.M0 = 0.05;

  OptimizeOptions opts;
  opts.vi_tol = 1e-7;
  const OptimizationReport rep = optimize(d, pots, y0, data, u0, grid, opts);

  for (std::size_t j = 1; j < rep.iterates.size(); ++j)
    CHECK(rep.iterates[j].cost <= rep.iterates[j - 1].cost + 1e-14);

  CHECK(rep.final_control.values.maxCoeff() <= 1.0 + 1e-10);
  CHECK(rep.final_control.values.minCoeff() >= -1.0 - 1e-10);
  CHECK(sigma_dt_norm(d, grid, rep.final_control.values) <= u0.M0 + 1e-8);

  // stationarity is still measurable through the natural residual
  const Eigen::MatrixXd g = reduced_gradient(rep.final_adjoint, rep.final_control, data.b0);
  CHECK(vi_residual(d, grid, rep.final_control, g) ==
        doctest::Approx(rep.iterates.back().vi_residual).epsilon(1e-10));
}
