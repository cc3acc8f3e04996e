#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* kCanonicalConfig = R"(
[mesh]
dimension = 1
n = 32

[time]
T = 0.1
steps = 100

[potentials]
kind = regular_double_well

[initial]
profile = cosine(1, 0.1)

[control]
initial = zero
u_min = -1
u_max = 1
M0 = inf

[tracking]
zQ = zero
bQ = 1
b0 = 1e-2

[output]
dir = OUTDIR
seed = 12345
)";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("chbc_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int counter() {
    static int c = 0;
    return c++;
  }
};

std::string write_config(const TempDir& dir, std::string body, const std::string& name) {
  const std::string outdir = (dir.path / "out").string();
  const auto pos = body.find("OUTDIR");
  if (pos != std::string::npos) body.replace(pos, 6, outdir);
  const fs::path cfg = dir.path / name;
  std::ofstream(cfg) << body;
  return cfg.string();
}

int run(const std::string& args) {
  const std::string cmd = std::string(CHBC_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("state command runs the canonical config and writes outputs") {
  TempDir dir;
  const std::string cfg = write_config(dir, kCanonicalConfig, "run.cfg");
  CHECK(run("state " + cfg) == 0);
  CHECK(fs::exists(dir.path / "out" / "series.csv"));
  CHECK(fs::exists(dir.path / "out" / "snapshot_final.csv"));

  const std::string series = slurp(dir.path / "out" / "series.csv");
  CHECK(series.rfind("t,mean,energy,max_abs_y", 0) == 0);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  TempDir a, b;
  const std::string ca = write_config(a, kCanonicalConfig, "run.cfg");
  const std::string cb = write_config(b, kCanonicalConfig, "run.cfg");
  REQUIRE(run("state " + ca + " --output-dir " + (a.path / "o1").string()) == 0);
  REQUIRE(run("state " + cb + " --output-dir " + (b.path / "o2").string()) == 0);
  CHECK(slurp(a.path / "o1" / "series.csv") == slurp(b.path / "o2" / "series.csv"));
  CHECK(slurp(a.path / "o1" / "snapshot_final.csv") ==
        slurp(b.path / "o2" / "snapshot_final.csv"));
}

TEST_CASE("inconsistent control box fails with the config exit code") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  const auto pos = body.find("u_min = -1");
  body.replace(pos, 10, "u_min = 2");
  const std::string cfg = write_config(dir, body, "bad.cfg");
  CHECK(run("state " + cfg) == 1);
}

TEST_CASE("missing initial-datum file fails with the config exit code") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  const auto pos = body.find("profile = cosine(1, 0.1)");
  body.replace(pos, 24, "profile = csv(missing.csv)");
  const std::string cfg = write_config(dir, body, "missing.cfg");
  CHECK(run("state " + cfg) == 1);
}

TEST_CASE("missing config file fails cleanly") {
  CHECK(run("state /nonexistent/path.cfg") == 1);
}

TEST_CASE("optimize: all-zero weights are rejected") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  auto pos = body.find("bQ = 1");
  body.replace(pos, 6, "bQ = 0");
  pos = body.find("b0 = 1e-2");
  body.replace(pos, 9, "b0 = 0");
  const std::string cfg = write_config(dir, body, "zero.cfg");
  CHECK(run("optimize " + cfg) == 1);
}

TEST_CASE("optimize: nonzero terminal weights without a couple are rejected") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  const auto pos = body.find("b0 = 1e-2");
  body.replace(pos, 9, "b0 = 1e-2\nbOmega = 0.5");
  const std::string cfg = write_config(dir, body, "terminal.cfg");
  CHECK(run("optimize " + cfg) == 1);
}

TEST_CASE("optimize: perfect-tracking data terminate immediately") {
  TempDir dir;
  // zQ = zero with y0 = zero: the uncontrolled solution is the target.
  std::string body = kCanonicalConfig;
  const auto pos = body.find("profile = cosine(1, 0.1)");
  body.replace(pos, 24, "profile = zero");
  const std::string cfg = write_config(dir, body, "stationary.cfg");
  CHECK(run("optimize " + cfg) == 0);
  const std::string iters = slurp(dir.path / "out" / "iterations.csv");
  // header plus the single stationary record
  CHECK(std::count(iters.begin(), iters.end(), '\n') == 2);
}

TEST_CASE("optimize: canonical problem converges and writes the control") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  // a coarser grid keeps this test quick; the acceptance suite runs the full one
  auto pos = body.find("n = 32");
  body.replace(pos, 6, "n = 16");
  pos = body.find("steps = 100");
  body.replace(pos, 11, "steps = 50");
  pos = body.find("T = 0.1");
  body.replace(pos, 7, "T = 0.05");
  const std::string cfg = write_config(dir, body, "opt.cfg");
  CHECK(run("optimize " + cfg) == 0);
  CHECK(fs::exists(dir.path / "out" / "iterations.csv"));
  CHECK(fs::exists(dir.path / "out" / "control.csv"));
  const std::string control = slurp(dir.path / "out" / "control.csv");
  CHECK(control.rfind("boundary_node,time,value", 0) == 0);
}

TEST_CASE("a starved Newton iteration cap maps to the solver exit code") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  body += "\n[solver]\nnewton_max_iter = 1\nnewton_tol_abs = 1e-15\nnewton_tol_rel = 1e-15\n";
  const std::string cfg = write_config(dir, body, "starved.cfg");
  CHECK(run("state " + cfg) == 2);
}

TEST_CASE("an optimizer iteration cap maps to exit code 3") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  auto pos = body.find("n = 32");
  body.replace(pos, 6, "n = 16");
  pos = body.find("steps = 100");
  body.replace(pos, 11, "steps = 25");
  pos = body.find("T = 0.1");
  body.replace(pos, 7, "T = 0.025");
  body += "\n[solver]\nvi_tol = 1e-14\nmax_opt_iter = 1\n";
  const std::string cfg = write_config(dir, body, "capped.cfg");
  CHECK(run("optimize " + cfg) == 3);
}

TEST_CASE("grad-check and project commands pass on the canonical config") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  // small grid: three finite-difference probes need several state solves
  auto pos = body.find("n = 32");
  body.replace(pos, 6, "n = 16");
  pos = body.find("steps = 100");
  body.replace(pos, 11, "steps = 25");
  pos = body.find("T = 0.1");
  body.replace(pos, 7, "T = 0.025");
  const std::string cfg = write_config(dir, body, "probe.cfg");
  CHECK(run("grad-check " + cfg) == 0);
  CHECK(run("project " + cfg) == 0);
}

TEST_CASE("csv initial datum and csv control are accepted") {
  TempDir dir;
  std::string body = R"(
[mesh]
dimension = 1
n = 4

[time]
T = 0.004
steps = 4

[initial]
profile = csv(y0.csv)

[control]
initial = csv(u0.csv)
u_min = -1
u_max = 1

[output]
dir = OUTDIR
)";
  {
    std::ofstream y0(dir.path / "y0.csv");
    for (int i = 0; i < 5; ++i) y0 << 0.1 * i << "\n";
    std::ofstream u0(dir.path / "u0.csv");
    u0 << "boundary_node,time,value\n";
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k <= 4; ++k) u0 << b << ',' << 0.001 * k << ',' << 0.25 << "\n";
  }
  const std::string cfg = write_config(dir, body, "csvio.cfg");
  CHECK(run("state " + cfg) == 0);

  // truncated control file: every (node, time) entry must be covered
  {
    std::ofstream u0(dir.path / "u0.csv");
    u0 << "boundary_node,time,value\n0,0,0.25\n";
  }
  CHECK(run("state " + cfg) == 1);
}

TEST_CASE("2D run writes the VTK snapshot") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  auto pos = body.find("dimension = 1");
  body.replace(pos, 13, "dimension = 2");
  pos = body.find("n = 32");
  body.replace(pos, 6, "n = 8");
  pos = body.find("steps = 100");
  body.replace(pos, 11, "steps = 10");
  pos = body.find("T = 0.1");
  body.replace(pos, 7, "T = 0.01");
  body += "\nwrite_vtk = true\n";
  const std::string cfg = write_config(dir, body, "vtk.cfg");
  CHECK(run("state " + cfg) == 0);
  CHECK(fs::exists(dir.path / "out" / "final.vtk"));
  const std::string vtk = slurp(dir.path / "out" / "final.vtk");
  CHECK(vtk.find("DATASET STRUCTURED_POINTS") != std::string::npos);
  CHECK(vtk.find("DIMENSIONS 9 9 1") != std::string::npos);
}

TEST_CASE("verify passes on the canonical config") {
  TempDir dir;
  const std::string cfg = write_config(dir, kCanonicalConfig, "verify.cfg");
  CHECK(run("verify " + cfg) == 0);
}

TEST_CASE("verify fails with exit 4 when the Newton tolerance is hobbled") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  auto pos = body.find("n = 32");
  body.replace(pos, 6, "n = 16");
  pos = body.find("steps = 100");
  body.replace(pos, 11, "steps = 25");
  pos = body.find("T = 0.1");
  body.replace(pos, 7, "T = 0.025");
  body += "\n[solver]\nnewton_tol_abs = 1e-2\nnewton_tol_rel = 1e-2\n";
  const std::string cfg = write_config(dir, body, "loose.cfg");
  CHECK(run("verify " + cfg) == 4);
}

TEST_CASE("verify fails with exit 4 for a potential violating the assumptions") {
  TempDir dir;
  std::string body = kCanonicalConfig;
  auto pos = body.find("kind = regular_double_well");
  // f'(0) != 0: shifted double well with a linear term
  body.replace(pos, 26,
               "kind = polynomial\n"
               "bulk_coeffs = 1.25, 1.0, -0.5, 0.0, 0.25\n"
               "boundary_coeffs = 1.25, 1.0, -0.5, 0.0, 0.25\n"
               "lower_bound_fpp = -1\n"
               "lower_bound_fGpp = -1");
  pos = body.find("n = 32");
  body.replace(pos, 6, "n = 16");
  pos = body.find("steps = 100");
  body.replace(pos, 11, "steps = 25");
  pos = body.find("T = 0.1");
  body.replace(pos, 7, "T = 0.025");
  const std::string cfg = write_config(dir, body, "badpot.cfg");
  CHECK(run("verify " + cfg) == 4);
}
