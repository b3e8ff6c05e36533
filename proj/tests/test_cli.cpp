#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "qsampler/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("qsampler_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = env + " " + QSAMPLER_BIN + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

const char* kTrain = R"({"target": "bell", "backend": "exact", "epochs": 30, "eval_interval": 10, "seed": 4})";

}  // namespace

TEST(Cli, TrainWritesHistoryAndIsDeterministic) {
  const auto dir = scratch("train");
  write(dir / "cfg.json", kTrain);
  ASSERT_EQ(run("train --config " + (dir / "cfg.json").string() + " --out " + (dir / "a").string(), dir).code, 0);
  ASSERT_EQ(run("train --config " + (dir / "cfg.json").string() + " --out " + (dir / "b").string(), dir).code, 0);
  const std::string a = slurp(dir / "a" / "history.jsonl");
  EXPECT_EQ(a, slurp(dir / "b" / "history.jsonl"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(dir / "a" / "final.json"));
  EXPECT_TRUE(fs::exists(dir / "a" / "summary.json"));
  const auto params = qs::io::read_checkpoint(dir / "a" / "final.json");
  EXPECT_EQ(params.topology.n_visible(), 4);

  ASSERT_EQ(run("train --config " + (dir / "cfg.json").string() + " --seed 5 --out " + (dir / "c").string(), dir).code, 0);
  EXPECT_NE(a, slurp(dir / "c" / "history.jsonl"));
}

TEST(Cli, EnvironmentOverridesOut) {
  const auto dir = scratch("env");
  write(dir / "cfg.json", kTrain);
  const auto r = run("train --config " + (dir / "cfg.json").string() + " --out " + (dir / "flag").string(), dir,
                     "QSAMPLER_OUT=" + (dir / "env").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "env" / "history.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "flag"));
}

TEST(Cli, EvalProducesWitnessCurve) {
  const auto dir = scratch("eval");
  write(dir / "cfg.json", R"({"target": "bell", "backend": "exact", "epochs": 400, "seed": 1})");
  ASSERT_EQ(run("train --config " + (dir / "cfg.json").string() + " --out " + (dir / "t").string(), dir).code, 0);
  write(dir / "eval.json", R"({"checkpoint": ")" + (dir / "t" / "final.json").string() +
                               R"(", "target": "bell", "backend": "gibbs", "samples": 20000, "seed": 3})");
  ASSERT_EQ(run("eval --config " + (dir / "eval.json").string() + " --out " + (dir / "e1").string(), dir).code, 0);
  ASSERT_EQ(run("eval --config " + (dir / "eval.json").string() + " --out " + (dir / "e2").string(), dir).code, 0);
  const std::string csv = slurp(dir / "e1" / "witness.csv");
  EXPECT_EQ(csv, slurp(dir / "e2" / "witness.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 32);
  EXPECT_TRUE(fs::exists(dir / "e1" / "metrics.json"));
}

TEST(Cli, MalformedJsonReportsLineAndColumn) {
  const auto dir = scratch("malformed");
  write(dir / "cfg.json", "{\n  \"target\": \"bell\",\n  \"epochs\": ,\n}\n");
  const auto r = run("train --config " + (dir / "cfg.json").string() + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cfg.json:3:"), std::string::npos) << r.err;
}

TEST(Cli, SchemaErrorsExitTwo) {
  const auto dir = scratch("schema");
  write(dir / "cfg.json", R"({"target": "bell", "epochz": 3})");
  const auto r = run("train --config " + (dir / "cfg.json").string() + " --out " + (dir / "o").string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("epochz"), std::string::npos) << r.err;
  write(dir / "bench.json", R"({"n_spins": [2], "m_hidden": [20]})");
  EXPECT_EQ(run("bench --config " + (dir / "bench.json").string() + " --out " + (dir / "o").string(), dir).code, 2);
  EXPECT_EQ(run("train --config " + (dir / "missing.json").string(), dir).code, 2);
  EXPECT_EQ(run("frobnicate --config x", dir).code, 2);
}

TEST(Cli, RuntimeErrorExitsThree) {
  const auto dir = scratch("runtime");
  write(dir / "cal.json", R"({"points": 5, "duration_us": 2000, "max_residual": 1e-9})");
  EXPECT_EQ(run("calibrate --config " + (dir / "cal.json").string() + " --out " + (dir / "o").string(), dir).code, 3);
}

TEST(Cli, CalibrateAndBenchTables) {
  const auto dir = scratch("tables");
  write(dir / "cal.json", R"({"points": 11})");
  ASSERT_EQ(run("calibrate --config " + (dir / "cal.json").string() + " --out " + (dir / "c").string(), dir).code, 0);
  const std::string act = slurp(dir / "c" / "activation.csv");
  EXPECT_EQ(std::count(act.begin(), act.end(), '\n'), 12);
  const auto cal = qs::io::read_json_file(dir / "c" / "calibration.json");
  EXPECT_TRUE(cal.contains("u0"));
  EXPECT_TRUE(cal.contains("alpha"));

  write(dir / "bench.json",
        R"({"n_spins": [2, 4, 6, 8, 10], "m_hidden": [20, 40, 60, 80, 100, 120, 140, 160, 180, 200],
            "samples": 10000, "clock_hz": 3e9})");
  ASSERT_EQ(run("bench --config " + (dir / "bench.json").string() + " --out " + (dir / "b").string(), dir).code, 0);
  const std::string bench = slurp(dir / "b" / "bench.csv");
  EXPECT_EQ(std::count(bench.begin(), bench.end(), '\n'), 51);
  EXPECT_TRUE(fs::exists(dir / "b" / "crossover.json"));
}

TEST(Cli, NyquistTable) {
  const auto dir = scratch("nyquist");
  write(dir / "cfg.json", R"({"target": "bell", "backend": "exact", "epochs": 200, "seed": 2})");
  ASSERT_EQ(run("train --config " + (dir / "cfg.json").string() + " --out " + (dir / "t").string(), dir).code, 0);
  write(dir / "ny.json", R"({"checkpoint": ")" + (dir / "t" / "final.json").string() +
                             R"(", "target": "bell", "samples": 2000})");
  const auto r = run("nyquist --config " + (dir / "ny.json").string() + " --out " + (dir / "n").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "n" / "nyquist.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}
