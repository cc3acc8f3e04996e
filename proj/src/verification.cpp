#include "chbc/verification.hpp"

#include <cmath>
#include <sstream>

#include "chbc/quadrature.hpp"

namespace chbc {

double max_step_residual(const Discretization& d, const PotentialPair& pots,
                         const StateTrajectory& traj, const SpaceTimeControl& u,
                         const TimeGrid& grid) {
  const SplitPair split = make_split(pots);
  const double tau = grid.tau();
  double worst = 0.0;
  for (int k = 0; k < grid.steps; ++k) {
    const Field& y = traj.y[k + 1];
    const Field& w = traj.w[k];
    const BoundaryField& yg = traj.y_gamma[k + 1];

    Eigen::VectorXd f1 = d.M_diag.cwiseProduct(y - traj.y[k]) / tau + d.K * w;

    Eigen::VectorXd f2 = d.K * y - d.M_diag.cwiseProduct(w);
    for (int i = 0; i < d.bulk_nodes; ++i)
      f2[i] += d.M_diag[i] * (split.bulk.convex(y[i], 1) + split.bulk.concave(traj.y[k][i], 1));
    BoundaryField br = d.Mb_diag.cwiseProduct(yg - traj.y_gamma[k]) / tau + d.Kb * yg;
    for (int b = 0; b < d.boundary_nodes(); ++b)
      br[b] += d.Mb_diag[b] * (split.boundary.convex(yg[b], 1) +
                               split.boundary.concave(traj.y_gamma[k][b], 1) -
                               u.values(b, k + 1));
    f2 += d.lift_boundary(br);

    worst = std::max(worst, std::sqrt(f1.squaredNorm() + f2.squaredNorm()));
  }
  return worst;
}

namespace verify {

namespace {

CheckResult ok(const std::string& suite, const std::string& name, double value,
               double threshold, bool pass, const std::string& note = "") {
  return CheckResult{suite, name, pass, value, threshold, note};
}

CheckResult below(const std::string& suite, const std::string& name, double value,
                  double threshold, const std::string& note = "") {
  return ok(suite, name, value, threshold, value <= threshold, note);
}

CheckResult in_band(const std::string& suite, const std::string& name, double value, double lo,
                    double hi, const std::string& note = "") {
  CheckResult c{suite, name, value >= lo && value <= hi, value, hi, note};
  return c;
}

Field random_field(const Discretization& d, Rng& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> dist(-amp, amp);
  Field v(d.bulk_nodes);
  for (int i = 0; i < v.size(); ++i) v[i] = dist(rng);
  return v;
}

Field random_zero_mean(const Discretization& d, Rng& rng) {
  Field v = random_field(d, rng);
  v.array() -= d.mean_value(v);
  return v;
}

Eigen::MatrixXd random_control_values(const Discretization& d, const TimeGrid& g, Rng& rng,
                                      double amp = 1.0) {
  std::uniform_real_distribution<double> dist(-amp, amp);
  Eigen::MatrixXd m(d.boundary_nodes(), g.steps + 1);
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r) m(r, c) = dist(rng);
  return m;
}

// Time-constant boundary bump 1 + 0.5 cos used as the tangent increment.
Eigen::MatrixXd bump_increment(const Discretization& d, const TimeGrid& g) {
  BoundaryField hb(d.boundary_nodes());
  for (int b = 0; b < d.boundary_nodes(); ++b) {
    const int i = d.boundary_index[b];
    double v = std::cos(M_PI * d.coords(i, 0));
    if (d.dimension == 2) v *= std::cos(M_PI * d.coords(i, 1));
    hb[b] = 1.0 + 0.5 * v;
  }
  Eigen::MatrixXd h(d.boundary_nodes(), g.steps + 1);
  for (int k = 0; k <= g.steps; ++k) h.col(k) = hb;
  return h;
}

}  // namespace

std::vector<CheckResult> potentials_suite(const PotentialPair& pair, double r_lo, double r_hi,
                                          int samples, Rng& rng) {
  const std::string suite = "potentials";
  std::vector<CheckResult> out;

  const AssumptionReport rep = check_assumptions(pair, r_lo, r_hi, samples);
  for (const auto& c : rep.checks)
    out.push_back(ok(suite, c.name, c.worst, 0.0, c.pass, c.detail));

  // Derivative consistency: central differences of order k-1 match order k.
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double worst = 0.0;
  const double delta = 1e-6;
  for (int trial = 0; trial < 50; ++trial) {
    const double r = dist(rng);
    for (int k = 1; k <= 4; ++k) {
      for (const Potential* p : {&pair.bulk, &pair.boundary}) {
        const double fd = (p->eval(r + delta, k - 1) - p->eval(r - delta, k - 1)) / (2 * delta);
        const double ex = p->eval(r, k);
        worst = std::max(worst, std::abs(fd - ex) / (1.0 + std::abs(ex)));
      }
    }
  }
  out.push_back(below(suite, "derivative orders consistent with finite differences", worst, 1e-6));

  // Split identity and convex-part monotonicity.
  const SplitPair split = make_split(pair, r_lo, r_hi, samples);
  double split_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double r = dist(rng);
    const double lhs = split.bulk.convex(r, 1) + split.bulk.concave(r, 1);
    split_err = std::max(split_err,
                         std::abs(lhs - pair.bulk.eval(r, 1)) / (1.0 + std::abs(lhs)));
  }
  out.push_back(below(suite, "convex + concave parts reproduce f'", split_err, 1e-14));

  double mono = 0.0;  // most negative increment of f_cx'
  double prev = split.bulk.convex(r_lo, 1);
  for (int s = 1; s < samples; ++s) {
    const double r = r_lo + s * (r_hi - r_lo) / (samples - 1);
    const double cur = split.bulk.convex(r, 1);
    mono = std::min(mono, cur - prev);
    prev = cur;
  }
  out.push_back(ok(suite, "convex part has nondecreasing derivative", mono, 0.0, mono >= -1e-12));
  return out;
}

std::vector<CheckResult> discretization_suite(int dimension, int n, Rng& rng) {
  const std::string suite = "discretization";
  std::vector<CheckResult> out;
  const Discretization d = (dimension == 1) ? build_interval_mesh(n) : build_square_mesh(n);

  double sym = 0.0, psd = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Field v = random_field(d, rng);
    const Field w = random_field(d, rng);
    const double kvw = v.dot(d.K * w), kwv = w.dot(d.K * v);
    const double mvw = v.dot(d.M * w), mwv = w.dot(d.M * v);
    sym = std::max(sym, std::abs(kvw - kwv) / (1.0 + std::abs(kvw)));
    sym = std::max(sym, std::abs(mvw - mwv) / (1.0 + std::abs(mvw)));
    psd = std::min(psd, v.dot(d.K * v));
  }
  out.push_back(below(suite, "operator symmetry on random pairs", sym, 1e-12));
  out.push_back(ok(suite, "stiffness positive semidefinite", psd, 0.0, psd >= -1e-12));

  const double k1 = (d.K * Field::Ones(d.bulk_nodes)).cwiseAbs().maxCoeff();
  const double kb1 =
      (d.Kb * BoundaryField::Ones(d.boundary_nodes())).cwiseAbs().maxCoeff();
  out.push_back(below(suite, "constants in the stiffness kernel", std::max(k1, kb1), 1e-12 / d.h));

  out.push_back(below(suite, "bulk measure equals |Omega|", std::abs(d.volume - 1.0), 1e-12));
  const double per = dimension == 1 ? 2.0 : 4.0;
  out.push_back(
      below(suite, "boundary measure equals |Gamma|", std::abs(d.perimeter - per), 1e-12));

  // Second-order convergence of the Dirichlet energy for a smooth field.
  auto energy_err = [](int m) {
    const Discretization dm = build_interval_mesh(m);
    Field v(dm.bulk_nodes);
    for (int i = 0; i < dm.bulk_nodes; ++i) v[i] = std::cos(M_PI * dm.coords(i, 0));
    return std::abs(v.dot(dm.K * v) - M_PI * M_PI / 2.0);
  };
  const double ratio = energy_err(n) / energy_err(2 * n);
  out.push_back(in_band(suite, "Dirichlet energy refines at second order", ratio, 3.5, 4.5));

  if (dimension == 2) {
    out.push_back(ok(suite, "perimeter node count is 4n",
                     static_cast<double>(d.boundary_nodes()), 4.0 * n,
                     d.boundary_nodes() == 4 * n));
    // Closed-curve Dirichlet energy of sin(2 pi s / |Gamma|).
    BoundaryField g(d.boundary_nodes());
    for (int b = 0; b < d.boundary_nodes(); ++b)
      g[b] = std::sin(2.0 * M_PI * (b * d.h) / d.perimeter);
    const double exact = 2.0 * M_PI * M_PI / d.perimeter;
    const double rel = std::abs(g.dot(d.Kb * g) - exact) / exact;
    out.push_back(below(suite, "boundary Dirichlet energy matches the closed curve", rel, 0.02));
  }
  return out;
}

std::vector<CheckResult> neumann_suite(const Discretization& d, Rng& rng) {
  const std::string suite = "neumann";
  std::vector<CheckResult> out;

  {  // Analytic oracle on the 1D canonical mesh: -v'' = cos(pi x).
    const Discretization d64 = build_interval_mesh(64);
    const NeumannOperator op(d64);
    Field rhs(d64.bulk_nodes), exact(d64.bulk_nodes);
    for (int i = 0; i < d64.bulk_nodes; ++i) {
      rhs[i] = std::cos(M_PI * d64.coords(i, 0));
      exact[i] = rhs[i] / (M_PI * M_PI);
    }
    const Field v = op.solve(rhs);
    out.push_back(below(suite, "cosine datum reproduces cos(pi x)/pi^2",
                        (v - exact).cwiseAbs().maxCoeff(), 1e-3));
    const double dn = op.dual_norm(rhs);
    const double dn_exact = 1.0 / std::sqrt(2.0 * M_PI * M_PI);
    out.push_back(
        below(suite, "dual norm of the cosine datum", std::abs(dn - dn_exact) / dn_exact, 0.01));
  }

  const NeumannOperator op(d);
  double sym = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Field u = random_zero_mean(d, rng);
    const Field v = random_zero_mean(d, rng);
    const double a = op.pairing(u, v), b = op.pairing(v, u);
    sym = std::max(sym, std::abs(a - b) / (1.0 + std::abs(a)));
  }
  out.push_back(below(suite, "pairing symmetry on random zero-mean pairs", sym, 1e-10));

  {  // N(M^{-1} K x) returns the mean-free x.
    Field x = random_zero_mean(d, rng);
    const Field vstar = (d.K * x).cwiseQuotient(d.M_diag);
    const double err = (op.solve(vstar) - x).cwiseAbs().maxCoeff();
    out.push_back(below(suite, "inverse identity against K", err, 1e-9));
  }

  {  // Linearity and homogeneity.
    const Field u = random_zero_mean(d, rng);
    const Field v = random_zero_mean(d, rng);
    const Field lin = op.solve(2.5 * u - 0.75 * v) - 2.5 * op.solve(u) + 0.75 * op.solve(v);
    out.push_back(below(suite, "linearity", lin.cwiseAbs().maxCoeff(), 1e-12));
    const double hom = std::abs(op.dual_norm(-3.0 * u) - 3.0 * op.dual_norm(u));
    out.push_back(below(suite, "norm homogeneity", hom, 1e-12));
  }

  {  // Backward-Euler convexity of the squared dual norm along a random path.
    std::vector<Field> path;
    for (int s = 0; s <= 10; ++s) path.push_back(random_zero_mean(d, rng));
    double telescoped = 0.0;
    for (int s = 0; s < 10; ++s)
      telescoped += 2.0 * op.pairing(path[s + 1] - path[s], path[s + 1]);
    const double ends = op.pairing(path[10], path[10]) - op.pairing(path[0], path[0]);
    out.push_back(ok(suite, "telescoped chain rule bounds the norm difference",
                     telescoped - ends, 0.0, telescoped - ends >= -1e-12));
  }
  return out;
}

std::vector<CheckResult> state_suite(const Discretization& d, const PotentialPair& pots,
                                     const Field& y0, const SpaceTimeControl& u,
                                     const TimeGrid& grid, const NewtonOptions& opts) {
  const std::string suite = "state";
  std::vector<CheckResult> out;

  const StateTrajectory traj = solve_state(d, pots, y0, u, grid, opts);
  const StateSummary s = summarize_state(d, pots, traj);

  out.push_back(below(suite, "mass conservation |mean(y_k) - m0|", s.mass_drift,
                      1e-10 * (1.0 + std::abs(d.integrate(y0)))));
  out.push_back(
      below(suite, "free energy non-increasing per step", s.max_energy_increase, 1e-12));
  out.push_back(below(suite, "trajectory stays inside the wells", s.max_abs_y, 1.0));

  const StateTrajectory again = solve_state(d, pots, y0, u, grid, opts);
  double repro = 0.0;
  for (std::size_t k = 0; k < traj.y.size(); ++k)
    repro = std::max(repro, (traj.y[k] - again.y[k]).cwiseAbs().maxCoeff());
  out.push_back(ok(suite, "determinism: repeated solve is bit-identical", repro, 0.0,
                   repro == 0.0));

  out.push_back(below(suite, "step equations hold at the stored trajectory",
                      max_step_residual(d, pots, traj, u, grid), 1e-8));
  return out;
}

std::vector<CheckResult> tangent_suite(const Discretization& d, const PotentialPair& pots,
                                       const Field& y0, const TimeGrid& grid,
                                       const NewtonOptions& opts) {
  const std::string suite = "tangent";
  std::vector<CheckResult> out;

  const SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
  const Eigen::MatrixXd h = bump_increment(d, grid);

  const StateTrajectory base = solve_state(d, pots, y0, u, grid, opts);
  const CoefficientFields coeffs = build_coefficients(pots, base);
  const LinearizedTrajectory lin = solve_linearized(d, pots, coeffs, h, grid, opts);

  auto remainder = [&](double eps) {
    SpaceTimeControl ue = u;
    ue.values += eps * h;
    const StateTrajectory te = solve_state(d, pots, y0, ue, grid, opts);
    double worst = 0.0;
    for (int k = 0; k <= grid.steps; ++k) {
      const Field th = te.y[k] - base.y[k] - eps * lin.xi[k];
      const BoundaryField thg = te.y_gamma[k] - base.y_gamma[k] - eps * lin.xi_gamma[k];
      worst = std::max(worst, std::sqrt(th.dot(d.M_diag.cwiseProduct(th)) +
                                        thg.dot(d.Mb_diag.cwiseProduct(thg))));
    }
    return worst;
  };

  const double e1 = remainder(1e-2), e2 = remainder(5e-3), e3 = remainder(2.5e-3);
  out.push_back(in_band(suite, "remainder ratio eps=1e-2 / eps=5e-3", e1 / e2, 3.5, 4.5));
  out.push_back(in_band(suite, "remainder ratio eps=5e-3 / eps=2.5e-3", e2 / e3, 3.5, 4.5));
  return out;
}

std::vector<CheckResult> duality_suite(const Discretization& d, const PotentialPair& pots,
                                       const Field& y0, const TimeGrid& grid,
                                       const NewtonOptions& opts, Rng& rng) {
  const std::string suite = "duality";
  std::vector<CheckResult> out;

  const SpaceTimeControl u = SpaceTimeControl::zero(d, grid);
  const StateTrajectory traj = solve_state(d, pots, y0, u, grid, opts);

  // The gap is exact for any base trajectory; the audit ties it to one that
  // actually solves the step equations.
  out.push_back(below(suite, "state residual audit", max_step_residual(d, pots, traj, u, grid),
                      1e-8));

  const CoefficientFields coeffs = build_coefficients(pots, traj);
  const Eigen::MatrixXd h = random_control_values(d, grid, rng);
  const LinearizedTrajectory lin = solve_linearized(d, pots, coeffs, h, grid, opts);

  {
    TrackingData data;
    data.bQ = 1.0;
    data.b0 = 1e-2;
    const AdjointTrajectory adj = solve_adjoint(d, pots, coeffs, data, traj, grid, opts);
    out.push_back(below(suite, "duality gap with zero terminal data",
                        duality_gap(d, lin, adj, h, data, traj, grid), 1e-8));
  }

  {
    // Compatible terminal data built from a zero-mean cosine.
    Field Phi(d.bulk_nodes);
    for (int i = 0; i < d.bulk_nodes; ++i) {
      double v = std::cos(M_PI * d.coords(i, 0));
      if (d.dimension == 2) v *= std::cos(M_PI * d.coords(i, 1));
      Phi[i] = v;
    }
    Phi.array() -= d.mean_value(Phi);

    TrackingData data;
    data.bQ = 1.0;
    data.b0 = 1e-2;
    data.bOmega = 0.5;
    data.bGamma = 0.25;
    const NeumannOperator op(d);
    Field phi_omega = op.solve(Phi);
    phi_omega.array() += 0.2;  // arbitrary admissible mean
    data.z_Omega = traj.y.back() - phi_omega / data.bOmega;
    data.z_Gamma = traj.y_gamma.back() - d.trace(Phi) / data.bGamma;

    TerminalCouple terminal{Phi};
    const AdjointTrajectory adj =
        solve_adjoint(d, pots, coeffs, data, traj, grid, opts, &terminal);
    out.push_back(below(suite, "duality gap with compatible terminal data",
                        duality_gap(d, lin, adj, h, data, traj, grid), 1e-8));
  }
  return out;
}

std::vector<CheckResult> projection_suite(Rng& rng) {
  const std::string suite = "projection";
  std::vector<CheckResult> out;

  const Discretization d = build_interval_mesh(4);  // two boundary nodes
  const TimeGrid grid{1.0, 5};
  Eigen::MatrixXd lo = Eigen::MatrixXd::Constant(2, 6, -1.0);
  Eigen::MatrixXd hi = Eigen::MatrixXd::Constant(2, 6, 1.0);

  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd u = random_control_values(d, grid, rng, 2.0);
    const AdmissibleProjection dyk = project_admissible(d, grid, u, lo, hi, 0.5, 1e-11);
    const Eigen::MatrixXd qp = oracle::qp_project(d, grid, u, lo, hi, 0.5);
    worst = std::max(worst, sigma_norm(d, grid, dyk.values - qp));
  }
  out.push_back(below(suite, "Dykstra matches the dense QP oracle", worst, 1e-6));

  {  // Box-only case coincides with the clamp.
    const Eigen::MatrixXd u = random_control_values(d, grid, rng, 2.0);
    const AdmissibleProjection p = project_admissible(d, grid, u, lo, hi, kInf);
    const double diff = (p.values - project_box(u, lo, hi)).cwiseAbs().maxCoeff();
    out.push_back(ok(suite, "box-only projection equals the clamp", diff, 0.0, diff == 0.0));
  }

  {  // Ball-only sawtooth: the constrained norm lands on M0.
    Eigen::MatrixXd saw(2, 6);
    for (int k = 0; k < 6; ++k) {
      saw(0, k) = (k % 2 == 0) ? 1.0 : -1.0;
      saw(1, k) = (k % 2 == 0) ? -1.0 : 1.0;
    }
    const double M0 = 0.5 * sigma_dt_norm(d, grid, saw);
    const Eigen::MatrixXd v = project_derivative_ball(d, grid, saw, M0);
    out.push_back(below(suite, "ball projection lands on the bound",
                        std::abs(sigma_dt_norm(d, grid, v) - M0), 1e-9 * std::max(1.0, M0)));
    const Eigen::MatrixXd unb_lo = Eigen::MatrixXd::Constant(2, 6, -kInf);
    const Eigen::MatrixXd unb_hi = Eigen::MatrixXd::Constant(2, 6, kInf);
    const Eigen::MatrixXd qp = oracle::qp_project(d, grid, saw, unb_lo, unb_hi, M0);
    out.push_back(
        below(suite, "ball projection matches the QP oracle", sigma_norm(d, grid, v - qp), 1e-6));
  }
  return out;
}

std::vector<CheckResult> gradient_suite(const Discretization& d, const PotentialPair& pots,
                                        const Field& y0, const TrackingData& data,
                                        const SpaceTimeControl& box_template,
                                        const TimeGrid& grid, const NewtonOptions& opts,
                                        Rng& rng, int probes) {
  const std::string suite = "gradient";
  std::vector<CheckResult> out;
  const double eps = 1e-4;

  for (int t = 0; t < probes; ++t) {
    SpaceTimeControl u = box_template;
    u.values = random_control_values(d, grid, rng, 0.5);
    u.values = project_admissible(d, grid, u.values, u.u_min, u.u_max, u.M0).values;
    const Eigen::MatrixXd h = random_control_values(d, grid, rng);

    const StateTrajectory traj = solve_state(d, pots, y0, u, grid, opts);
    const CoefficientFields coeffs = build_coefficients(pots, traj);
    const AdjointTrajectory adj = solve_adjoint(d, pots, coeffs, data, traj, grid, opts);
    const Eigen::MatrixXd g = reduced_gradient(adj, u, data.b0);
    const double pairing = sigma_inner(d, grid, g, h);

    SpaceTimeControl up = u, um = u;
    up.values += eps * h;
    um.values -= eps * h;
    const double jp = evaluate_cost(d, solve_state(d, pots, y0, up, grid, opts), up, data, grid);
    const double jm = evaluate_cost(d, solve_state(d, pots, y0, um, grid, opts), um, data, grid);
    const double fd = (jp - jm) / (2.0 * eps);

    std::ostringstream name;
    name << "adjoint gradient matches central differences (probe " << t + 1 << ")";
    out.push_back(below(suite, name.str(), std::abs(pairing - fd) / std::abs(fd), 1e-4));
  }
  return out;
}

std::vector<CheckResult> run_all(const RunConfig& cfg) {
  Rng rng(cfg.seed);
  const Discretization d = make_discretization(cfg);
  const PotentialPair pots = make_potentials(cfg);
  const TimeGrid grid = make_time_grid(cfg);
  const Field y0 = make_initial(cfg, d);
  const SpaceTimeControl u = make_control(cfg, d, grid);
  const TrackingData data = make_tracking(cfg, d, grid);

  std::vector<CheckResult> all;
  auto append = [&all](std::vector<CheckResult> v) {
    all.insert(all.end(), v.begin(), v.end());
  };
  append(potentials_suite(pots, cfg.validate_lo, cfg.validate_hi, cfg.validate_samples, rng));
  append(discretization_suite(cfg.dimension, cfg.n, rng));
  append(neumann_suite(d, rng));
  append(state_suite(d, pots, y0, u, grid, cfg.newton));
  append(tangent_suite(d, pots, y0, grid, cfg.newton));
  append(duality_suite(d, pots, y0, grid, cfg.newton, rng));
  append(projection_suite(rng));
  append(gradient_suite(d, pots, y0, data, u, grid, cfg.newton, rng));
  return all;
}

}  // namespace verify

namespace oracle {

Eigen::MatrixXd qp_project(const Discretization& d, const TimeGrid& g,
                           const Eigen::MatrixXd& values, const Eigen::MatrixXd& lo,
                           const Eigen::MatrixXd& hi, double M0) {
  const int nb = static_cast<int>(values.rows());
  const int nt = static_cast<int>(values.cols());

  // Coordinate descent on 1/2|x-u|_W^2 + mu/2 |Dx|^2 with clamping; W and the
  // derivative form decouple per (node, time) coordinate given the neighbors.
  auto solve_for_mu = [&](double mu) {
    Eigen::MatrixXd x = values.cwiseMax(lo).cwiseMin(hi);
    const double c = mu / g.tau();
    for (int sweep = 0; sweep < 200000; ++sweep) {
      double change = 0.0;
      for (int b = 0; b < nb; ++b) {
        const double mb = d.Mb_diag[b];
        for (int k = 0; k < nt; ++k) {
          const double wbk = mb * g.weight(k);
          double num = wbk * values(b, k);
          double den = wbk;
          if (k > 0) {
            num += c * mb * x(b, k - 1);
            den += c * mb;
          }
          if (k < nt - 1) {
            num += c * mb * x(b, k + 1);
            den += c * mb;
          }
          const double xn = std::min(hi(b, k), std::max(lo(b, k), num / den));
          change = std::max(change, std::abs(xn - x(b, k)));
          x(b, k) = xn;
        }
      }
      if (change <= 1e-15) break;
    }
    return x;
  };

  Eigen::MatrixXd x = solve_for_mu(0.0);
  if (std::isinf(M0) || sigma_dt_norm(d, g, x) <= M0) return x;

  double lo_mu = 0.0, hi_mu = 1.0;
  while (sigma_dt_norm(d, g, solve_for_mu(hi_mu)) > M0) {
    lo_mu = hi_mu;
    hi_mu *= 4.0;
    if (hi_mu > 1e30) throw SolverError("qp_project: dual bracket failed");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo_mu + hi_mu);
    x = solve_for_mu(mid);
    const double norm = sigma_dt_norm(d, g, x);
    if (std::abs(norm - M0) <= 1e-11 * std::max(1.0, M0)) return x;
    (norm > M0 ? lo_mu : hi_mu) = mid;
  }
  return x;
}

}  // namespace oracle

}  // namespace chbc
