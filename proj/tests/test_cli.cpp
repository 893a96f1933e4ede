#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kFixtures = LQS_FIXTURE_DIR;
const std::string kCli = LQS_CLI_PATH;

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "lqs_cli_test";
  fs::create_directories(d);
  return d / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Runs the CLI with stdout to `out` and stderr discarded; returns the exit code.
int run(const std::string& args, const fs::path& out) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string fx(const std::string& name) { return "\"" + (kFixtures / name).string() + "\""; }

}  // namespace

TEST(Cli, RealizabilityReport) {
  const fs::path out = scratch("real.json");
  ASSERT_EQ(run("realizability " + fx("cavity.json"), out), 0);
  const Json j = Json::parse(slurp(out));
  EXPECT_TRUE(j["realizability"]["passes"].get<bool>());
  EXPECT_EQ(j["command"], "realizability");
  EXPECT_TRUE(j.contains("version"));
  EXPECT_TRUE(j.contains("tolerances"));
}

TEST(Cli, DecomposeOptomechanical) {
  const fs::path out = scratch("dec.json");
  ASSERT_EQ(run("decompose " + fx("optomech.json"), out), 0);
  const Json j = Json::parse(slurp(out));
  EXPECT_EQ(j["dims"]["n_h"], 2);
  EXPECT_EQ(j["dims"]["n_co"], 1);
  EXPECT_EQ(j["dims"]["n_cbar_obar"], 0);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("err.json");
  EXPECT_EQ(run("realizability " + fx("nonunitary.json"), out), 2);
  EXPECT_EQ(run("realizability " + fx("no_version.json"), out), 2);
  EXPECT_EQ(run("realizability " + fx("missing.json"), out), 3);
  EXPECT_EQ(run("no-such-verb", out), 2);
  EXPECT_EQ(run("transfer " + fx("cavity.json") + " --grid 1:2", out), 2);
}

TEST(Cli, FailedRunLeavesNoOutput) {
  const fs::path out = scratch("stdout.txt"), target = scratch("never.json");
  fs::remove(target);
  EXPECT_NE(run("realizability " + fx("nonunitary.json") + " --out \"" + target.string() + "\"", out), 0);
  EXPECT_FALSE(fs::exists(target));
}

TEST(Cli, FilterSimulationDeterministic) {
  const fs::path a = scratch("fa.csv"), b = scratch("fb.csv"), r = scratch("r.json");
  const std::string args = "filter-sim " + fx("cavity.json") + " --dt 0.01 --horizon 1 --seed 42 --report \"" +
                           r.string() + "\" --out ";
  ASSERT_EQ(run(args + "\"" + a.string() + "\"", scratch("o1")), 0);
  ASSERT_EQ(run(args + "\"" + b.string() + "\"", scratch("o2")), 0);
  const std::string ca = slurp(a);
  EXPECT_EQ(ca, slurp(b));
  EXPECT_EQ(ca.substr(0, ca.find('\n')), "t,pi_1,pi_2,V_11,V_12,V_22,dnu_1");
}

TEST(Cli, TransferCsv) {
  const fs::path csv = scratch("tf.csv");
  ASSERT_EQ(run("transfer " + fx("cavity.json") + " --grid -1:1:5 --out \"" + csv.string() + "\"", scratch("o3")), 0);
  const std::string s = slurp(csv);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 6);
}

TEST(Cli, PulsePreservesNorm) {
  const fs::path out = scratch("pulse.json"), csv = scratch("pulse.csv");
  ASSERT_EQ(run("pulse " + fx("cavity.json") + " " + fx("gaussian_pulse.json") + " --out \"" + csv.string() + "\"",
                out),
            0);
  const Json j = Json::parse(slurp(out));
  EXPECT_NEAR(j["norm_out"].get<double>(), 1.0, 1e-6);
}

TEST(Cli, NetworkClosedLoop) {
  const fs::path out = scratch("net.json");
  ASSERT_EQ(run("network " + fx("network_feedback.json"), out), 0);
  const Json j = Json::parse(slurp(out));
  EXPECT_TRUE(j["closed_loop"]["realizability"]["passes"].get<bool>());
}
