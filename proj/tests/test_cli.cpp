#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"

using voimpc::testing::repo_path;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = voimpc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "voimpc_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value printed after `key ` on its own summary line.
double summary_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(key.size() + 1));
  }
  FAIL("missing summary key " << key);
  return 0.0;
}

const std::string kCanonical = repo_path("configs/canonical.json").string();

}  // namespace

TEST_CASE("simulate writes a trace and a summary") {
  const auto trace = scratch("sim.csv");
  const auto r = run({"simulate", "--config", kCanonical, "--out", trace.string()});
  REQUIRE(r.code == 0);
  CHECK(summary_value(r.out, "windows") == 119);
  CHECK(summary_value(r.out, "depleted_windows") == 0);
  CHECK(r.out.find("trace " + trace.string()) != std::string::npos);
  const auto records = voimpc::read_trace(trace).records;
  CHECK(records.size() == 119);

  const auto again = scratch("sim_again.csv");
  REQUIRE(run({"simulate", "--config", kCanonical, "--out", again.string()}).code == 0);
  CHECK(read_text(trace) == read_text(again));
}

TEST_CASE("simulate errors") {
  auto r = run({"simulate"});
  CHECK(r.code != 0);
  CHECK(r.code != 1);
  r = run({"simulate", "--config", scratch("absent.json").string()});
  CHECK(r.code != 0);
  r = run({"simulate", "--config", kCanonical, "--initial-soe", "1.5", "--out",
           scratch("x.csv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("initial.soe") != std::string::npos);
  r = run({"simulate", "--config", kCanonical, "--set", "battery.capacity_ah=0"});
  CHECK(r.code == 1);
  CHECK(r.err.find("battery") != std::string::npos);
  r = run({"frobnicate"});
  CHECK(r.code != 0);
}

TEST_CASE("baseline") {
  auto r = run({"baseline", "--config", kCanonical, "--fs", "50", "--ft", "50", "--out",
                scratch("b50.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(summary_value(r.out, "mean_f_s") <= 50.0);
  r = run({"baseline", "--config", kCanonical, "--fs", "10", "--ft", "20"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("profile-shutdown") {
  auto r = run({"profile-shutdown", "--fs", "100", "--ft", "100"});
  REQUIRE(r.code == 0);
  const double hours = std::stod(r.out);
  CHECK(hours == doctest::Approx(50.98).epsilon(1e-3));
  CHECK(hours >= 50.3 * 0.95);
  CHECK(hours <= 50.3 * 1.05);
  r = run({"profile-shutdown", "--fs", "0", "--ft", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "1894.2308\n");
  CHECK(run({"profile-shutdown", "--fs", "100"}).code != 0);
}

TEST_CASE("voi-curve") {
  const auto p = scratch("curve.csv");
  const auto r = run({"voi-curve", "--out", p.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("rows 120\n", 0) == 0);
  CHECK(read_text(p).rfind("timestamp,level,v_c_a,voi_a,v_c_b,voi_b\n", 0) == 0);
}

TEST_CASE("sweep over the energy weight") {
  const auto r = run({"sweep", "--config", kCanonical, "--param", "mpc.w_e", "--values", "0.1,0.5,0.9"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "param,value,windows,cumulative_voi,terminal_soe,depleted_windows,mean_f_s,mean_f_t");
  std::vector<double> voi;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    REQUIRE(f.size() == 8);
    voi.push_back(std::stod(f[3]));
  }
  REQUIRE(voi.size() == 3);
  CHECK(voi[0] >= voi[1]);
  CHECK(voi[1] >= voi[2]);

  CHECK(run({"sweep", "--config", kCanonical, "--param", "mpc.w_e", "--values", ""}).code != 0);
  CHECK(run({"sweep", "--config", kCanonical, "--param", "mpc.w_e", "--values", "bogus"}).code == 1);
}

TEST_CASE("a single-value sweep matches simulate") {
  const auto sw = run({"sweep", "--config", kCanonical, "--param", "mpc.w_e", "--values", "0.5"});
  const auto sim = run({"simulate", "--config", kCanonical, "--out", scratch("sim_half.csv").string()});
  REQUIRE(sw.code == 0);
  REQUIRE(sim.code == 0);
  const auto row = sw.out.substr(sw.out.find('\n') + 1);
  std::vector<std::string> f;
  std::stringstream ls(row);
  for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
  REQUIRE(f.size() == 8);
  CHECK(std::stod(f[2]) == summary_value(sim.out, "windows"));
  CHECK(std::stod(f[3]) == doctest::Approx(summary_value(sim.out, "cumulative_voi")).epsilon(1e-8));
  CHECK(std::stod(f[5]) == summary_value(sim.out, "depleted_windows"));
}

TEST_CASE("generated scenario CSVs reproduce the synthetic run") {
  const auto dir = scratch("scenario");
  REQUIRE(run({"gen-scenario", "--config", kCanonical, "--out-dir", dir.string()}).code == 0);
  const auto cfg = dir / "csv.json";
  std::ofstream(cfg) << R"({"battery": {"ocv_table": ")" << repo_path("data/ocv_default.csv").string()
                     << R"("}, "initial": {"soe": 0.3},
    "dataset": {"process_csv": "process.csv", "irradiance_csv": "irradiance.csv"}})";
  const auto from_csv = scratch("from_csv.csv");
  const auto synthetic = scratch("synthetic.csv");
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", from_csv.string()}).code == 0);
  REQUIRE(run({"simulate", "--config", kCanonical, "--out", synthetic.string()}).code == 0);
  const auto a = voimpc::read_trace(from_csv).records;
  const auto b = voimpc::read_trace(synthetic).records;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].timestamp == b[i].timestamp);
    CHECK(a[i].f_s_applied == b[i].f_s_applied);
    CHECK(a[i].f_t_applied == b[i].f_t_applied);
    CHECK(a[i].z == doctest::Approx(b[i].z).epsilon(1e-7));
  }
}
