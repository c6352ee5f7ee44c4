#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nabk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int exec(const std::string& args) const {
    const std::string cmd = "env -u NABK_OUTPUT_DIR '" + std::string(NABK_CLI_PATH) + "' " + args + " 2>" +
                            (dir_ / "stderr.txt").string() + " >" + (dir_ / "stdout.txt").string();
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  nlohmann::json read_json(const std::string& name) const {
    std::ifstream in(dir_ / name);
    return nlohmann::json::parse(in);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, SolveMrnabkBrown) {
  ASSERT_EQ(exec("solve --problem brown --n 100 --method mrnabk --out " + path("r.json")), 0);
  const auto j = read_json("r.json");
  EXPECT_EQ(j["iters"], 1);
  EXPECT_EQ(j["status"], "converged");
}

TEST_F(Cli, SolveNgabkHEquation) {
  ASSERT_EQ(exec("solve --problem h-equation --n 50 --method ngabk --history --out " + path("h.json")), 0);
  EXPECT_EQ(read_json("h.json")["iters"], 70);
  EXPECT_TRUE(fs::exists(dir_ / "h.history.csv"));
}

TEST_F(Cli, SolveNewtonAtRoot) {
  ASSERT_EQ(exec("solve --problem brown --n 10 --method newton --x0 const:1.0 --out " + path("n.json")), 0);
  EXPECT_EQ(read_json("n.json")["iters"], 0);
}

TEST_F(Cli, SolveWritesStdoutWithoutOut) {
  ASSERT_EQ(exec("solve --problem brown --n 5 --method ngabk"), 0);
  std::ifstream in(dir_ / "stdout.txt");
  EXPECT_NO_THROW(nlohmann::json::parse(in));
}

TEST_F(Cli, BreakdownExitCode) {
  EXPECT_EQ(exec("solve --problem h-equation --n 1 --param c=0.5 --x0 const:8 --out " + path("b.json")), 3);
  EXPECT_EQ(read_json("b.json")["status"], "breakdown");
}

TEST_F(Cli, SizeGuardExitCode) {
  EXPECT_EQ(exec("diagnose --problem brown --n 2001 --out " + path("d.json")), 4);
  EXPECT_FALSE(fs::exists(dir_ / "d.json"));
}

TEST_F(Cli, UnknownSuiteIsUsageError) {
  EXPECT_EQ(exec("bench --suite bogus --out " + path("x.csv")), 2);
  EXPECT_FALSE(fs::exists(dir_ / "x.csv"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(exec("solve --problem nope --n 5"), 2);
  EXPECT_EQ(exec("solve --problem brown --n 5 --method bogus"), 2);
  EXPECT_EQ(exec("solve --problem brown --n 5 --param q=1"), 2);
  EXPECT_EQ(exec("solve --problem brown --n 5 --no-such-flag"), 2);
  EXPECT_EQ(exec("bench"), 2);
}

TEST_F(Cli, BenchWritesCsvAndStats) {
  ASSERT_EQ(exec("bench --suite h-equation --sizes 20 --repeats 2 --out " + path("b.csv")), 0);
  std::ifstream in(dir_ / "b.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "method,problem,n,m,rho,iters,final_residual_sq,wall_ms,seed,repeats,status");
  EXPECT_TRUE(fs::exists(dir_ / "b_iters.csv"));
}

TEST_F(Cli, RhoSweep) {
  ASSERT_EQ(exec("rho-sweep --sizes 20 --rhos 0.1,0.9 --repeats 1 --out " + path("s.csv")), 0);
  std::ifstream in(dir_ / "s.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("mrnabk,h-equation,20,20,0.9,"), std::string::npos);
}

TEST_F(Cli, Diagnose) {
  ASSERT_EQ(exec("diagnose --problem brown --n 6 --x0 const:0.9 --out " + path("d.json")), 0);
  const auto j = read_json("d.json");
  EXPECT_TRUE(j.contains("steps"));
  EXPECT_TRUE(j["summary"].contains("all_applicable_within_bound"));
}

}  // namespace
