#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "lmc/commands.hpp"
#include "lmc/config.hpp"
#include "lmc/error.hpp"
#include "lmc/output.hpp"

using namespace lmc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[domain]
kind = ball
center = 0 0
radius = 1

[target]
kind = ball
center = 0 0
radius = 0.5

[source]
kind = affine
iota = 0 0
kappa = 0 0

[grid]
resolution = 17
)";

fs::path scratch_root() {
  return fs::temp_directory_path() / ("lmc_test_cli_" + std::to_string(::getpid()));
}

struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
  }
} cleanup;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

RunConfig minimal_in(const fs::path& dir, const std::string& extra = "") {
  RunConfig c = parse_config_text(std::string(kMinimal) + extra);
  c.output.directory = dir.string();
  return c;
}

std::string error_code(const std::string& text) {
  try {
    parse_config_text(text, "test.ini");
  } catch (const Error& e) {
    CHECK(e.module() == "cli");
    return e.code();
  }
  return "none";
}

std::string error_message(const std::string& text) {
  try {
    parse_config_text(text, "test.ini");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

struct Process {
  int status = -1;
  std::string last_line;
};

Process run_binary(const std::string& args) {
  const std::string cmd = std::string(LMC_BINARY) + " " + args + " 2>/dev/null";
  Process p;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::string out;
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int raw = ::pclose(pipe);
  p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  while (!out.empty() && out.back() == '\n') out.pop_back();
  const auto nl = out.rfind('\n');
  p.last_line = nl == std::string::npos ? out : out.substr(nl + 1);
  return p;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const RunConfig c = parse_config_text(kMinimal);
  CHECK(c.dim() == 2);
  CHECK(c.domain.kind == DomainKind::ball);
  CHECK(c.domain.radius == 1.0);
  CHECK(c.target.radius == 0.5);
  CHECK(c.resolution == 17);
  CHECK(c.source.kind == "affine");
  CHECK_FALSE(c.initial.explicit_map);
  CHECK(c.flow.cfl == 0.5);
  CHECK(c.flow.t_max == 50.0);
  CHECK(c.flow.sample_every == 50);
  CHECK(c.flow.eps_convex == 1e-6);
  CHECK_FALSE(c.flow.delta.has_value());
  CHECK(c.output.directory == "output");
  CHECK_FALSE(c.output.heatmaps);
  CHECK(c.source.build(2).is_zero());
}

TEST_CASE("parse errors carry a code and line context") {
  CHECK(error_code(std::string(kMinimal) + "[grid]\nresolution = 33\n") == "duplicate-key");
  CHECK(error_code(std::string(kMinimal) + "[flow]\ncfl = 0.5\ncfl = 0.4\n") == "duplicate-key");
  CHECK(error_code(std::string(kMinimal) + "[flow]\nspeed = 1\n") == "unknown-key");
  CHECK(error_code(std::string(kMinimal) + "[extras]\n") == "unknown-section");
  CHECK(error_code("[domain]\nkind = ball\ncenter = 0 0\nradius = 1\n") == "missing-section");
  CHECK(error_code(std::string(kMinimal) + "[flow]\ncfl = fast\n") == "invalid-value");
  CHECK(error_code(std::string(kMinimal) + "[output]\nheatmaps = yes\n") == "invalid-value");

  const std::string msg = error_message(std::string(kMinimal) + "[flow]\nspeed = 1\n");
  CHECK(msg.find("test.ini") != std::string::npos);
  CHECK(msg.find("test.ini:20:") != std::string::npos);
}

TEST_CASE("missing config file is an io error") {
  try {
    parse_config("/nonexistent/lmc.ini");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == "io");
  }
}

TEST_CASE("coarse resolution surfaces at run time, not parse time") {
  const fs::path dir = scratch_dir("coarse");
  RunConfig c = minimal_in(dir);
  c.resolution = 5;
  std::ostringstream out;
  try {
    run_command(c, out);
    FAIL("expected a grid error");
  } catch (const Error& e) {
    CHECK(e.module() == "grid");
    CHECK(e.code() == "coarse-resolution");
  }
}

TEST_CASE("run writes atomic, deterministic artifacts with the documented headers") {
  const fs::path a = scratch_dir("run_a"), b = scratch_dir("run_b");
  std::ostringstream out;
  CHECK(run_command(minimal_in(a, "[output]\nheatmaps = true\n"), out) == 0);
  CHECK(run_command(minimal_in(b), out) == 0);

  for (const char* file : {"profile.csv", "diagnostics.csv", "summary.txt"}) {
    CHECK(fs::exists(a / file));
    CHECK(slurp(a / file) == slurp(b / file));
  }
  for (const char* file : {"u.pgm", "udot.pgm", "lam_min.pgm"}) {
    CHECK(fs::exists(a / file));
    CHECK(slurp(a / file).rfind("P5\n17 17\n255\n", 0) == 0);
  }
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(entry.path().extension() != ".tmp");
  }

  const std::string profile = slurp(a / "profile.csv");
  CHECK(profile.rfind("i,j,x,y,u,ux,uy,uxx,uxy,uyy,lam_min,lam_max\n", 0) == 0);
  const std::string diag = slurp(a / "diagnostics.csv");
  CHECK(diag.rfind("t,dt,udot_min,udot_max,udot_mean,udot_osc,lam_min,lam_max,obliq_min,"
                   "bc_residual_max,image_violation,sumF_min,sumF_max,sumFl2_min,sumFl2_max\n",
                   0) == 0);
  const std::string summary = slurp(a / "summary.txt");
  for (const char* key : {"c_inf=", "t_final=", "steps=", "converged=true", "translator_residual=",
                          "resolution=17", "delta=", "Lambda1=", "eps0="}) {
    CHECK(summary.find(key) != std::string::npos);
  }
}

TEST_CASE("atomic write replaces existing content") {
  const fs::path dir = scratch_dir("atomic");
  write_file_atomic((dir / "nested" / "f.txt").string(), "first");
  write_file_atomic((dir / "nested" / "f.txt").string(), "second");
  CHECK(slurp(dir / "nested" / "f.txt") == "second");
  CHECK_FALSE(fs::exists(dir / "nested" / "f.txt.tmp"));
}

TEST_CASE("field csv round-trips u") {
  const fs::path dir = scratch_dir("roundtrip");
  const RunConfig c = minimal_in(dir);
  const auto lat = build_lattice(c.domain.build(), c.resolution);
  const Field u = initial_field(c, lat);
  const Field back = read_field_csv(field_csv(u), lat);
  for (int idx : lat->active_nodes()) CHECK(back[idx] == u[idx]);
  CHECK_THROWS_AS(read_field_csv("bad,header\n", lat), Error);
}

TEST_CASE("1D field csv header") {
  const auto lat = build_lattice(ConvexDomain::interval(0.0, 1.0), 11);
  const Field u = sample_field(lat, [](const Vec& x) { return x(0) * x(0); });
  CHECK(field_csv(u).rfind("i,x,u,ux,uxx,lam_min,lam_max\n", 0) == 0);
}

TEST_CASE("binary exit codes and machine-readable last line") {
  const fs::path dir = scratch_dir("binary");
  write(dir / "stop.ini", std::string(kMinimal) + "[flow]\nt_max = 0\n[output]\ndirectory = " +
                              (dir / "out").string() + "\n");
  const Process stop = run_binary("run " + (dir / "stop.ini").string());
  CHECK(stop.status == 1);
  CHECK(stop.last_line == "ERROR flow did-not-converge");
  CHECK(fs::exists(dir / "out" / "diagnostics.csv"));

  write(dir / "bad.ini", std::string(kMinimal) + "[flow]\nspeed = 1\n");
  const Process bad = run_binary("run " + (dir / "bad.ini").string());
  CHECK(bad.status == 2);
  CHECK(bad.last_line == "ERROR cli unknown-key");

  write(dir / "check.ini", std::string(kMinimal) + "[output]\ndirectory = " +
                               (dir / "check").string() + "\n");
  const Process check = run_binary("check " + (dir / "check.ini").string());
  CHECK(check.status == 0);
  const std::string report = slurp(dir / "check" / "check.txt");
  CHECK(report.find("FAIL") == std::string::npos);
  CHECK(report.find("admissible=true") != std::string::npos);
  CHECK(report.find("eps0=") != std::string::npos);
}
