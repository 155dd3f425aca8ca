#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heomflow/config.hpp"
#include "heomflow/io.hpp"
#include "heomflow/scan.hpp"

using namespace heomflow;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "heomflow_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const auto dir = scratch();
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + HEOMFLOW_CLI_PATH + "\" " + args + " > \"" + out.string() +
                          "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_config(const std::string& name, const RunConfig& c) {
  const auto p = scratch() / name;
  std::ofstream(p) << serialize_config(c);
  return p;
}

}  // namespace

TEST(Cli, PresetDimerRoundTrips) {
  const auto r = run("preset dimer");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse_config(r.out), dimer_preset());
  const auto f = run("preset fmo");
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_EQ(parse_config(f.out).model.site_energies_cm.size(), 7u);
  EXPECT_EQ(run("preset trimer").code, 1);
}

TEST(Cli, NmAtWeakCoupling) {
  const auto cfg = write_config("dimer.json", dimer_preset());
  const auto r = run("nm --config " + cfg.string() + " --tau-c 150 --t-end 4000");
  ASSERT_EQ(r.code, 0) << r.err;
  const double v = std::stod(r.out);
  EXPECT_NEAR(v, 0.1, 0.05);
  EXPECT_TRUE(r.err.empty()) << r.err;
}

TEST(Cli, DistanceWithIdenticalStatesIsZero) {
  auto c = dimer_preset();
  c.task.initial_sites = {2, 2};
  c.integration.t_end_fs = 300.0;
  c.hierarchy.max_tier = 12;
  const auto cfg = write_config("same.json", c);
  const auto out = scratch() / "same_series.csv";
  const auto r = run("distance --config " + cfg.string() + " --tau-c 50 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = io::read_series(out);
  ASSERT_EQ(s.values.size(), 31u);
  for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(Cli, WarningsGoToStderr) {
  const auto cfg = write_config("dimer.json", dimer_preset());
  const auto r = run("nm --config " + cfg.string() + " --max-tier 4 --t-end 200");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_NO_THROW(std::stod(r.out));
}

TEST(Cli, ValidationErrorsExitOne) {
  const auto bad = scratch() / "bad.json";
  std::ofstream(bad) << R"({"schema_version": 1, "model": {"site_energies_cm": [0]}, "bath": {"lambda_cm": -1,
    "tau_c_fs": 10, "gamma_per_fs": 0.1}, "hierarchy": {"max_tier": 3}})";
  const auto r = run("propagate --config " + bad.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("lambda_cm"), std::string::npos);
  EXPECT_NE(r.err.find("gamma_per_fs"), std::string::npos);

  const auto cfg = write_config("dimer.json", dimer_preset());
  EXPECT_EQ(run("nm --config " + cfg.string() + " --lambda -4").code, 1);
  EXPECT_EQ(run("nm --config /nonexistent.json").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  // unstable step
  EXPECT_EQ(run("nm --config " + cfg.string() + " --tau-c 5 --t-end 100").code, 1);
}

TEST(Cli, NumericalFailureExitsTwo) {
  // An absurd temperature keeps the high-temperature check happy but blows up the couplings.
  auto c = dimer_preset();
  c.bath.temperature_K = 1e300;
  c.hierarchy.max_tier = 6;
  c.integration.t_end_fs = 100.0;
  const auto cfg = write_config("hot.json", c);
  const auto r = run("propagate --config " + cfg.string());
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, PropagateWithAdoSidecars) {
  auto c = dimer_preset();
  c.integration.t_end_fs = 20.0;
  c.hierarchy.max_tier = 2;
  const auto cfg = write_config("short.json", c);
  const auto dir = scratch() / "ados";
  fs::remove_all(dir);
  const auto out = scratch() / "traj.csv";
  const auto r = run("propagate --config " + cfg.string() + " --site 2 --out " + out.string() + " --ados-dir " +
                     dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream is(out);
  const auto traj = io::read_trajectory(is);
  ASSERT_EQ(traj.times_fs.size(), 3u);
  EXPECT_EQ(traj.system_states[0](1, 1), std::complex<double>(1.0, 0.0));
  EXPECT_TRUE(fs::exists(dir / "ado_000000.csv"));
  EXPECT_TRUE(fs::exists(dir / "ado_000002.csv"));
}

TEST(Cli, AdoDistanceAndOptimize) {
  auto c = dimer_preset();
  c.integration.t_end_fs = 200.0;
  c.hierarchy.max_tier = 10;
  const auto cfg = write_config("short_pair.json", c);
  const auto out = scratch() / "ado.csv";
  auto r = run("ado-distance --config " + cfg.string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = io::read_series(out);
  EXPECT_EQ(s.kind, SeriesKind::AdoDistance);
  EXPECT_EQ(s.values.front(), 0.0);

  const auto pairs = scratch() / "pairs.csv";
  r = run("nm-optimize --config " + cfg.string() + " --n-states 4 --max-tier 6 --t-end 200 --out " +
          pairs.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find('-'), std::string::npos);
  const auto table = slurp(pairs);
  EXPECT_NE(table.find("first,second,theta_1,phi_1,theta_2,phi_2,nm_ity"), std::string::npos);
}

TEST(Cli, ScanWritesTable) {
  auto c = dimer_preset();
  c.hierarchy.max_tier = 8;
  c.task.scan = ScanBlock{ScanParameter::Coupling, {-87.7, 0.0}, PairMode::FixedSitePair, {100.0}, 300.0, 1};
  const auto cfg = write_config("scan.json", c);
  const auto out = scratch() / "scan.csv";
  const auto r = run("scan --config " + cfg.string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto result = io::read_scan(out);
  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_EQ(result.parameter, ScanParameter::Coupling);
  EXPECT_LT(result.rows[1].nm_ity, 1e-6);
  EXPECT_NE(r.err.find("warning"), std::string::npos);  // 8 tiers is short of the requirement
  EXPECT_EQ(run("scan --config " + cfg.string() + " --parameter humidity").code, 1);
}
