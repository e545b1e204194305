#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cfg = LORCONE_CONFIGS;

int run(const std::string& args) {
  std::string cmd = std::string(LORCONE_BIN) + " " + args + " > cli_log.txt 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json report(const std::string& dir) { return json::parse(slurp(fs::path(dir) / "report.json")); }

}  // namespace

TEST_CASE("tcbb on the flat strip passes") {
  CHECK(run("--out cli_tcbb tcbb --cone " + cfg + "/minkowski_strip.json --K 0 --samples 500 --tol 0.02 --seed 7") == 0);
  auto r = report("cli_tcbb");
  CHECK(r["verdict"] == "PASS");
  CHECK(r["worstMargin"].get<double>() >= -0.02);
  CHECK(r.contains("bracketWidth"));
}

TEST_CASE("reports are reproducible across thread counts") {
  REQUIRE(run("--out cli_det1 --threads 1 tcbb --cone " + cfg + "/minkowski_strip.json --K 0 --samples 200 --seed 3") == 0);
  REQUIRE(run("--out cli_det2 --threads 4 tcbb --cone " + cfg + "/minkowski_strip.json --K 0 --samples 200 --seed 3") == 0);
  CHECK(slurp("cli_det1/report.json") == slurp("cli_det2/report.json"));
  CHECK(fs::exists("cli_det1/report.meta.json"));
}

TEST_CASE("sampling requires a seed") {
  CHECK(run("--out cli_noseed tcbb --cone " + cfg + "/minkowski_strip.json --K 0") == 1);
}

TEST_CASE("injected violation gives exit 2") {
  CHECK(run("--out cli_inj tcbb --configs " + cfg + "/tcbb_injected.json --K 0") == 2);
  CHECK(report("cli_inj")["verdict"] == "FAIL");
}

TEST_CASE("tau between a point and itself") {
  CHECK(run("--out cli_tau tau --cone " + cfg + "/minkowski_strip.json --from 10 5 --to 10 5") == 0);
  std::ifstream csv("cli_tau/tables/tau.csv");
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "s,x,t,y,lo,hi");
  CHECK(row == "10,5,10,5,0,0");
}

TEST_CASE("non-couplable measures give a coded error") {
  CHECK(run("--out cli_ot ot --cone " + cfg + "/minkowski_strip.json --mu0 " + cfg + "/late.json --mu1 " + cfg +
            "/early.json --seed 1") == 1);
  auto r = report("cli_ot");
  CHECK(r["error"]["code"] == "NOT_CAUSALLY_COUPLABLE");
}

TEST_CASE("config file drives a run") {
  fs::create_directories("cli_cfg");
  std::ofstream("cli_cfg/run.json") << json{{"out", "cli_cfg/out"},
                                            {"tcbb", {{"cone", cfg + "/minkowski_strip.json"}, {"K", 0}, {"samples", 100}, {"seed", 7}}}}
                                           .dump();
  CHECK(run("--config cli_cfg/run.json") == 0);
  CHECK(report("cli_cfg/out")["command"] == "tcbb");
}

TEST_CASE("curvature reductions") {
  CHECK(run("--out cli_ric ricci --warp " + cfg + "/sin_warp.json --K 1 --n 2 --fiber-bound 1") == 0);
  CHECK(fs::exists("cli_ric/tables/oneill.csv"));
  CHECK(run("--out cli_sec sectional --warp " + cfg + "/sin_warp.json --K 0 --fiber-bound -1") == 2);
}

TEST_CASE("bad input") {
  CHECK(run("--out cli_bad tau --cone /nonexistent.json") == 1);
  CHECK(run("--help") == 0);
}
