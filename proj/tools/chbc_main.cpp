#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "chbc/config.hpp"
#include "chbc/io.hpp"
#include "chbc/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIterationCap = 3;
constexpr int kExitVerifyFailed = 4;

struct Overrides {
  std::string output_dir;
  std::int64_t seed = -1;
  bool quiet = false;
};

chbc::RunConfig load_with_overrides(const std::string& path, const Overrides& ov) {
  chbc::RunConfig cfg = chbc::load_config(path);
  if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
  if (ov.seed >= 0) cfg.seed = static_cast<std::uint64_t>(ov.seed);
  return cfg;
}

void print_mesh_report(const chbc::Discretization& d, const chbc::TimeGrid& g, bool quiet) {
  if (quiet) return;
  std::printf("mesh: dimension=%d n=%d h=%s bulk_nodes=%d boundary_nodes=%d\n", d.dimension,
              d.n, chbc::g17(d.h).c_str(), d.bulk_nodes, d.boundary_nodes());
  std::printf("time: T=%s steps=%d tau=%s\n", chbc::g17(g.T).c_str(), g.steps,
              chbc::g17(g.tau()).c_str());
}

void export_operators(const chbc::RunConfig& cfg, const chbc::Discretization& d) {
  namespace fs = std::filesystem;
  chbc::write_coo((fs::path(cfg.output_dir) / "M.coo").string(), d.M);
  chbc::write_coo((fs::path(cfg.output_dir) / "K.coo").string(), d.K);
  chbc::write_coo((fs::path(cfg.output_dir) / "M_gamma.coo").string(), d.Mb);
  chbc::write_coo((fs::path(cfg.output_dir) / "K_gamma.coo").string(), d.Kb);
}

void write_state_outputs(const chbc::RunConfig& cfg, const chbc::Discretization& d,
                         const chbc::PotentialPair& pots, const chbc::TimeGrid& grid,
                         const chbc::StateTrajectory& traj) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  chbc::write_series_csv((fs::path(cfg.output_dir) / "series.csv").string(), d, pots, traj,
                         grid);
  if (cfg.snapshot_stride > 0) {
    for (int k = 0; k <= grid.steps; k += cfg.snapshot_stride) {
      const chbc::Field w = k > 0 ? traj.w[k - 1] : chbc::Field();
      char name[64];
      std::snprintf(name, sizeof(name), "snapshot_%06d.csv", k);
      chbc::write_snapshot_csv((fs::path(cfg.output_dir) / name).string(), d, traj.y[k], w);
    }
  }
  chbc::write_snapshot_csv((fs::path(cfg.output_dir) / "snapshot_final.csv").string(), d,
                           traj.y.back(), traj.w.back());
  if (cfg.write_vtk && d.dimension == 2) {
    chbc::write_vtk_structured((fs::path(cfg.output_dir) / "final.vtk").string(), d,
                               {{"y", traj.y.back()}, {"w", traj.w.back()}});
  }
  if (cfg.export_operators) export_operators(cfg, d);
}

// Warn-only probe of the initial-datum regularity: the discrete Laplacian
// energy should stay bounded under refinement for admissible data.
void check_initial_regularity(const chbc::RunConfig& cfg, bool quiet) {
  const chbc::Profile p = chbc::parse_profile(cfg.initial_profile);
  if (p.kind == chbc::Profile::Kind::Csv) return;  // cannot resample a file
  auto laplacian_energy = [&](int n) {
    chbc::RunConfig c = cfg;
    c.n = n;
    const chbc::Discretization d = chbc::make_discretization(c);
    const chbc::Field y0 = chbc::make_initial(c, d);
    const chbc::Field lap = (d.K * y0).cwiseQuotient(d.M_diag);
    return lap.dot(d.M_diag.cwiseProduct(lap));
  };
  const double coarse = laplacian_energy(cfg.n);
  const double fine = laplacian_energy(2 * cfg.n);
  if (fine > 2.0 * coarse + 1e-9 && !quiet) {
    std::fprintf(stderr,
                 "warning: discrete Laplacian energy of the initial datum grows under "
                 "refinement (%g -> %g); the regularity hypothesis on y0 looks doubtful\n",
                 coarse, fine);
  }
}

int cmd_state(const std::string& config_path, const Overrides& ov) {
  const chbc::RunConfig cfg = load_with_overrides(config_path, ov);
  const chbc::Discretization d = chbc::make_discretization(cfg);
  const chbc::PotentialPair pots = chbc::make_potentials(cfg);
  const chbc::TimeGrid grid = chbc::make_time_grid(cfg);
  const chbc::Field y0 = chbc::make_initial(cfg, d);
  const chbc::SpaceTimeControl u = chbc::make_control(cfg, d, grid);

  print_mesh_report(d, grid, ov.quiet);
  check_initial_regularity(cfg, ov.quiet);

  const chbc::StateTrajectory traj = chbc::solve_state(d, pots, y0, u, grid, cfg.newton);
  write_state_outputs(cfg, d, pots, grid, traj);

  const chbc::StateSummary s = chbc::summarize_state(d, pots, traj);
  if (!ov.quiet) {
    std::printf("mass drift: %s\n", chbc::g17(s.mass_drift).c_str());
    std::printf("energy: %s -> %s (max step increase %s)\n",
                chbc::g17(s.initial_energy).c_str(), chbc::g17(s.final_energy).c_str(),
                chbc::g17(s.max_energy_increase).c_str());
    std::printf("max |y|: %s\n", chbc::g17(s.max_abs_y).c_str());
    std::printf("outputs in %s\n", cfg.output_dir.c_str());
  }
  return kExitOk;
}

int cmd_optimize(const std::string& config_path, const Overrides& ov) {
  namespace fs = std::filesystem;
  const chbc::RunConfig cfg = load_with_overrides(config_path, ov);
  const chbc::Discretization d = chbc::make_discretization(cfg);
  const chbc::PotentialPair pots = chbc::make_potentials(cfg);
  const chbc::TimeGrid grid = chbc::make_time_grid(cfg);
  const chbc::Field y0 = chbc::make_initial(cfg, d);
  const chbc::SpaceTimeControl u0 = chbc::make_control(cfg, d, grid);
  const chbc::TrackingData data = chbc::make_tracking(cfg, d, grid);

  print_mesh_report(d, grid, ov.quiet);

  const chbc::OptimizationReport rep =
      chbc::optimize(d, pots, y0, data, u0, grid, chbc::make_optimize_options(cfg));

  fs::create_directories(cfg.output_dir);
  chbc::write_iterations_csv((fs::path(cfg.output_dir) / "iterations.csv").string(),
                             rep.iterates);
  chbc::write_control_csv((fs::path(cfg.output_dir) / "control.csv").string(), d, grid,
                          rep.final_control.values);
  write_state_outputs(cfg, d, pots, grid, rep.final_state);

  if (!ov.quiet) {
    std::printf("iterations: %zu\n", rep.iterates.size() - 1);
    std::printf("final cost: %s\n", chbc::g17(rep.final_cost).c_str());
    std::printf("final vi residual: %s\n",
                chbc::g17(rep.iterates.back().vi_residual).c_str());
    std::printf("termination: %s\n", rep.termination_reason.c_str());
    std::printf("outputs in %s\n", cfg.output_dir.c_str());
  }
  if (rep.converged) return kExitOk;
  if (rep.termination_reason.find("line search") != std::string::npos) return kExitSolver;
  return kExitIterationCap;
}

int print_results(const std::vector<chbc::CheckResult>& results, bool quiet) {
  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass) ++failures;
    if (!quiet || !r.pass)
      std::printf("[%s] %-16s %-58s measured %-12.5g vs %.5g\n", r.pass ? "PASS" : "FAIL",
                  r.suite.c_str(), r.name.c_str(), r.value, r.threshold);
  }
  std::printf("%zu checks, %d failures\n", results.size(), failures);
  return failures == 0 ? kExitOk : kExitVerifyFailed;
}

int cmd_verify(const std::string& config_path, const Overrides& ov) {
  const chbc::RunConfig cfg = load_with_overrides(config_path, ov);
  return print_results(chbc::verify::run_all(cfg), ov.quiet);
}

int cmd_grad_check(const std::string& config_path, const Overrides& ov) {
  const chbc::RunConfig cfg = load_with_overrides(config_path, ov);
  chbc::Rng rng(cfg.seed);
  const chbc::Discretization d = chbc::make_discretization(cfg);
  const chbc::PotentialPair pots = chbc::make_potentials(cfg);
  const chbc::TimeGrid grid = chbc::make_time_grid(cfg);
  const chbc::Field y0 = chbc::make_initial(cfg, d);
  const chbc::SpaceTimeControl u = chbc::make_control(cfg, d, grid);
  const chbc::TrackingData data = chbc::make_tracking(cfg, d, grid);
  return print_results(
      chbc::verify::gradient_suite(d, pots, y0, data, u, grid, cfg.newton, rng), ov.quiet);
}

int cmd_project(const std::string& config_path, const Overrides& ov) {
  const chbc::RunConfig cfg = load_with_overrides(config_path, ov);
  chbc::Rng rng(cfg.seed);
  return print_results(chbc::verify::projection_suite(rng), ov.quiet);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary control of the Cahn-Hilliard system with dynamic boundary conditions"};
  app.require_subcommand(1);

  Overrides ov;
  app.add_option("--output-dir", ov.output_dir, "override the configured output directory");
  app.add_option("--seed", ov.seed, "override the configured random seed");
  app.add_flag("--quiet", ov.quiet, "suppress informational output");

  std::string config_path;
  auto add = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("config", config_path, "run configuration file")->required();
    sub->fallthrough();  // allow the global --output-dir/--seed/--quiet after the subcommand
    return sub;
  };
  CLI::App* state = add("state", "solve the forward state system");
  CLI::App* optimize = add("optimize", "run projected gradient descent over U_ad");
  CLI::App* gradcheck = add("grad-check", "compare the adjoint gradient with finite differences");
  CLI::App* verify = add("verify", "run every verification suite");
  CLI::App* project = add("project", "run the projection oracles");

  CLI11_PARSE(app, argc, argv);

  try {
    if (state->parsed()) return cmd_state(config_path, ov);
    if (optimize->parsed()) return cmd_optimize(config_path, ov);
    if (gradcheck->parsed()) return cmd_grad_check(config_path, ov);
    if (verify->parsed()) return cmd_verify(config_path, ov);
    if (project->parsed()) return cmd_project(config_path, ov);
  } catch (const chbc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitConfig;
  } catch (const chbc::StepFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const chbc::SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
