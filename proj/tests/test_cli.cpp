#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qcds/json_io.hpp"
#include "qcds/model.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

using nlohmann::json;
using namespace qcds;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("qcds_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path out = scratch_dir() / "stdout.txt";
  const fs::path err = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string(QCDS_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Small 2-factor (r, y) model so each CLI invocation finishes in seconds.
fs::path fast_config() {
  static fs::path path = [] {
    ModelConfig cfg = default_config();
    cfg.active = {F_R, F_Y};
    cfg.numerics.nodes_per_dim = {13, 13, 13, 13};
    cfg.numerics.patches_per_dim = {6, 6, 6, 6};
    cfg.numerics.shape_scale = 0.1;
    cfg.numerics.time_steps = 50;
    cfg.numerics.quadrature_step_h = 1.0 / 12.0;
    fs::path p = scratch_dir() / "fast.json";
    std::ofstream f(p);
    f << to_json(cfg).dump(2);
    return p;
  }();
  return path;
}

std::string with_config(const std::string& sub, const std::string& rest = "") {
  return sub + " --config " + fast_config().string() +
         (rest.empty() ? "" : " " + rest);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

} // namespace

TEST_CASE("price emits a JSON record and a manifest") {
  RunResult r = run_cli(with_config("price"));
  REQUIRE(r.exit_code == 0);
  json rec = json::parse(r.out);
  const double sf = rec["spread"]["s_foreign_bps"].get<double>();
  const double sd = rec["spread"]["s_domestic_bps"].get<double>();
  const double basis = rec["spread"]["basis_bps"].get<double>();
  CHECK(sf > 0);
  CHECK(sf < 2000);
  CHECK(basis == doctest::Approx(sf - sd).epsilon(1e-12));
  CHECK(rec["legs"]["B"].size() == 20);
  CHECK(rec["legs"]["s_bps"].get<double>() == doctest::Approx(sf));
  CHECK(rec.contains("config_digest"));
  // manifest goes to stderr
  CHECK(r.err.find("wall_seconds") != std::string::npos);
  CHECK(r.err.find("config_digest") != std::string::npos);
}

TEST_CASE("full recovery makes the spread zero") {
  ModelConfig cfg = default_config();
  cfg.active = {F_R, F_Y};
  cfg.numerics.shape_scale = 0.1;
  cfg.numerics.time_steps = 50;
  cfg.numerics.quadrature_step_h = 1.0 / 12.0;
  cfg.contract.recovery = 1.0;
  fs::path p = scratch_dir() / "r1.json";
  std::ofstream(p) << to_json(cfg).dump();
  RunResult r = run_cli("price --config " + p.string());
  REQUIRE(r.exit_code == 0);
  json rec = json::parse(r.out);
  CHECK(rec["spread"]["s_foreign_bps"].get<double>() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("--out redirects the record to a file") {
  fs::path target = scratch_dir() / "record.json";
  RunResult r = run_cli(with_config("price", "--out " + target.string()));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.empty());
  json rec = json::parse(slurp(target));
  CHECK(rec.contains("spread"));
}

TEST_CASE("malformed config exits 2 with parse location") {
  fs::path p = scratch_dir() / "broken.json";
  std::ofstream(p) << "{ \"fx\": { \"z0\": 1.15, }";
  RunResult r = run_cli("price --config " + p.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("parse error") != std::string::npos);
}

TEST_CASE("config violations exit 2 and are listed") {
  ModelConfig cfg = default_config();
  cfg.fx.sigma_z = -0.1;
  cfg.contract.recovery = 1.5;
  fs::path p = scratch_dir() / "invalid.json";
  std::ofstream(p) << to_json(cfg).dump();
  RunResult r = run_cli("price --config " + p.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("sigma_z") != std::string::npos);
  CHECK(r.err.find("recovery") != std::string::npos);
}

TEST_CASE("unknown profile and unknown axis exit 2") {
  CHECK(run_cli(with_config("price", "--profile medium")).exit_code == 2);
  CHECK(run_cli(with_config("sweep", "--axis frobnicate --grid 0,1"))
            .exit_code == 2);
  CHECK(run_cli(with_config("sweep")).exit_code == 2); // no axis at all
}

TEST_CASE("sweep produces the pinned CSV schema deterministically") {
  const std::string args =
      with_config("sweep", "--axis sigma_z --grid 0.05,0.1 --seed 7");
  RunResult a = run_cli(args);
  REQUIRE(a.exit_code == 0);
  auto lines = lines_of(a.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "axis1,axis2,s_bps,sd_bps,basis_bps");
  CHECK(lines[1].substr(0, 9) == "0.050000,");
  CHECK(lines[2].substr(0, 9) == "0.100000,");
  // axis2 column empty for 1-D sweeps
  CHECK(lines[1].find(",,") != std::string::npos);
  // bit-identical rerun
  RunResult b = run_cli(args);
  CHECK(a.out == b.out);
}

TEST_CASE("two-axis sweep orders rows by grid index") {
  RunResult r = run_cli(
      with_config("sweep", "--axis sigma_z,sigma_y --grid '0.05,0.1;0.3'"));
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].substr(0, 18) == "0.050000,0.300000,");
  CHECK(lines[2].substr(0, 18) == "0.100000,0.300000,");
}

TEST_CASE("empty grid yields a header-only CSV") {
  RunResult r = run_cli(with_config("sweep", "--axis sigma_z --grid \"\""));
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == "axis1,axis2,s_bps,sd_bps,basis_bps\n");
}

TEST_CASE("a failing sweep point writes a NaN row and continues") {
  // the second grid value makes the per-point config invalid
  RunResult r =
      run_cli(with_config("sweep", "--axis sigma_r --grid 0.01,-0.5"));
  REQUIRE(r.exit_code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].find("nan") == std::string::npos);
  CHECK(lines[2] == "-0.500000,,nan,nan,nan");
}

TEST_CASE("validate emits the comparison report and is seed-stable") {
  const std::string args =
      with_config("validate", "--paths 4000 --seed 11 --workers 1");
  RunResult a = run_cli(args);
  REQUIRE((a.exit_code == 0 || a.exit_code == 4));
  auto lines = lines_of(a.out);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "quantity,pde,mc,mc_se,abs_diff,pass_3se");
  CHECK(lines[1].substr(0, 5) == "w(T),");
  CHECK(lines[2].substr(0, 11) == "protection,");
  CHECK(lines[3].substr(0, 5) == "bond,");
  CHECK(lines[4].substr(0, 11) == "spread_bps,");
  RunResult b = run_cli(args);
  CHECK(a.out == b.out);
  CHECK(a.exit_code == b.exit_code);
}
