#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "aggdiff/cli.hpp"

namespace fs = std::filesystem;
using namespace aggdiff;

namespace {

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("aggdiff_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string write_config(const std::string& name, const std::string& text) {
    const auto p = root_ / name;
    io::write_text(p.string(), text);
    return p.string();
  }

  int run(const std::string& cfg, const std::string& out, int threads, std::string* err_text = nullptr) {
    cli::Overrides ov;
    ov.out = out;
    ov.threads = threads;
    std::ostringstream log, err;
    const int rc = cli::run_command(cfg, ov, log, err);
    if (err_text) *err_text = err.str();
    return rc;
  }

  fs::path root_;
};

const char* kSimulate = R"({
  "command": "simulate",
  "potential": {"family": "WeaklyConfining", "params": [0.5]},
  "grid": {"r_max": 6.0, "N": 48},
  "solver": {"m": 2.0, "t_end": 0.2, "annuli": [[1.0, 2.0]], "snapshot_times": [0.0, 0.1]},
  "initial": {"type": "disk", "radius": 2.0}
}
)";

std::string slurp(const fs::path& p) { return io::read_text(p.string()); }

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_F(CliTest, SyntaxErrorReportsLine) {
  const auto cfg = write_config("bad.json", "{\n  \"command\": \"simulate\",\n  \"grid\": {\"N\": ,}\n}\n");
  std::string err;
  EXPECT_EQ(run(cfg, (root_ / "o").string(), 1, &err), cli::kBadConfig);
  EXPECT_NE(err.find("line 3"), std::string::npos) << err;
}

TEST_F(CliTest, UnknownKeyReportsLine) {
  const auto cfg = write_config("bad.json", "{\n  \"command\": \"assumptions\",\n  \"potential\": {\"family\": "
                                            "\"LogNewtonian\"},\n  \"bogus\": 1\n}\n");
  std::string err;
  EXPECT_EQ(run(cfg, (root_ / "o").string(), 1, &err), cli::kBadConfig);
  EXPECT_NE(err.find("bogus"), std::string::npos) << err;
  EXPECT_NE(err.find("line 4"), std::string::npos) << err;
}

TEST_F(CliTest, OutOfRangeValueRejected) {
  std::string text = kSimulate;
  text.replace(text.find("\"N\": 48"), 7, "\"N\": 0");
  std::string err;
  EXPECT_EQ(run(write_config("bad.json", text), (root_ / "o").string(), 1, &err), cli::kBadConfig);
  EXPECT_NE(err.find("line"), std::string::npos) << err;
}

TEST_F(CliTest, SimulateWritesArtifactsDeterministicallyAcrossThreadCounts) {
  const auto cfg = write_config("sim.json", kSimulate);
  const auto a = root_ / "a", b = root_ / "b";
  ASSERT_EQ(run(cfg, a.string(), 1), cli::kOk);
  ASSERT_EQ(run(cfg, b.string(), 2), cli::kOk);
  std::size_t files = 0;
  bool summary = false, timeseries = false, final_csv = false, snap = false;
  for (const auto& ent : fs::directory_iterator(a)) {
    const std::string name = ent.path().filename().string();
    ++files;
    summary |= name.ends_with("_summary.json");
    timeseries |= name.ends_with("_timeseries.csv");
    final_csv |= name.ends_with("_final.csv");
    snap |= name.find("_snapshot_1") != std::string::npos;
    ASSERT_TRUE(fs::exists(b / name)) << name;
    EXPECT_EQ(slurp(ent.path()), slurp(b / name)) << name;
    if (name.ends_with(".csv")) {
      EXPECT_EQ(slurp(ent.path()).rfind("# schema=v1\n", 0), 0u) << name;
    }
  }
  EXPECT_TRUE(summary && timeseries && final_csv && snap) << files;
}

TEST_F(CliTest, ErcCheckSteepPowerLawListsViolations) {
  const auto cfg = write_config("erc.json", R"({
  "command": "erc-check",
  "potential": {"family": "PowerLawForce", "params": [3.5]},
  "erc": {"R1": 1.0, "eps": [0.5], "r": {"min": 0.2, "max": 20.0, "n": 12}, "s": {"min": 0.2, "max": 20.0, "n": 12}}
}
)");
  const auto out = root_ / "erc";
  ASSERT_EQ(run(cfg, out.string(), 1), cli::kOk);
  bool found = false;
  for (const auto& ent : fs::directory_iterator(out)) {
    const std::string name = ent.path().filename().string();
    if (name.ends_with("_violations.csv")) {
      found = true;
      std::istringstream in(slurp(ent.path()));
      std::string line;
      int n = 0;
      while (std::getline(in, line)) ++n;
      EXPECT_GT(n, 2);  // schema line, header, at least one row
    }
    if (name.ends_with("_summary.json")) {
      const auto j = nlohmann::json::parse(slurp(ent.path()));
      EXPECT_TRUE(j["power_law_threshold"].contains("witness"));
      EXPECT_FALSE(j["power_law_threshold"]["nonnegative"].get<bool>());
    }
  }
  EXPECT_TRUE(found);
}

TEST_F(CliTest, DecomposeAndAssumptionsRun) {
  const auto dec = write_config("dec.json", R"({
  "command": "decompose",
  "grid": {"r_max": 8.0, "N": 64},
  "initial": {"type": "random", "count": 3, "support": 6.0},
  "varpi": 0.2,
  "seed": 11
}
)");
  ASSERT_EQ(run(dec, (root_ / "d").string(), 1), cli::kOk);
  const auto as = write_config("as.json", R"({
  "command": "assumptions",
  "potential": {"family": "WeaklyConfining", "params": [0.5]},
  "assumptions": {"m": 2.0, "r_min": 0.01, "r_max": 100.0, "n": 50}
}
)");
  ASSERT_EQ(run(as, (root_ / "s").string(), 1), cli::kOk);
  for (const auto& ent : fs::directory_iterator(root_ / "d")) {
    if (!ent.path().filename().string().ends_with("_summary.json")) continue;
    const auto j = nlohmann::json::parse(slurp(ent.path()));
    EXPECT_TRUE(j["decay_bound_holds"].get<bool>());
    EXPECT_LE(j["reconstruction_error"].get<double>(), 1e-12);
  }
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = AGGDIFF_CLI_PATH;
  const auto cfg = write_config("sim.json", kSimulate);
  // subcommand disagrees with the config
  EXPECT_EQ(shell(bin + " decompose --config " + cfg + " --out " + (root_ / "x").string()), cli::kBadConfig);
  // missing file is rejected by the argument parser
  EXPECT_NE(shell(bin + " simulate --config " + (root_ / "missing.json").string()), 0);
  const auto bad = write_config("bad.json", "{\n  \"command\": \"simulate\",\n");
  EXPECT_EQ(shell(bin + " simulate --config " + bad), cli::kBadConfig);
  EXPECT_EQ(shell(bin + " simulate --config " + cfg + " --out " + (root_ / "y").string() + " --threads 1"), cli::kOk);
}
