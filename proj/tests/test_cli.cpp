#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>

#ifndef MSN_CLI
#error "MSN_CLI must point at the msn executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(MSN_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

double field(const std::string& text, const std::string& label) {
  const std::regex re(label + R"(\s+([-+0-9.eE]+|inf|nan))");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return std::nan("");
  return std::stod(m[1]);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("msn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out() const { return " --out " + dir_.string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  const Result unknown = run("bench unknown-id" + out());
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.out.find("wedge-benchmark"), std::string::npos) << unknown.out;
  EXPECT_NE(unknown.out.find("noise-sweep"), std::string::npos);
  EXPECT_EQ(run("fit --data /nonexistent/points.csv" + out()).code, 1);
  EXPECT_EQ(run("fit --target single --data x.csv" + out()).code, 1);
  EXPECT_EQ(run("fit --target nope" + out()).code, 1);
  EXPECT_EQ(run("solve corner --bc XY" + out()).code, 1);
  EXPECT_EQ(run("fit --target single --eta-mu 1" + out()).code, 1);
}

TEST_F(Cli, ListShowsRegistry) {
  const Result r = run("list");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("wedge-benchmark"), std::string::npos);
  EXPECT_NE(r.out.find("40 runs"), std::string::npos) << r.out;
}

TEST_F(Cli, RateCurve) {
  const fs::path csv = dir_ / "rate.csv";
  const Result r = run("rate-curve --alpha 0.5 --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "mu,c_star,R");
  bool found = false;
  for (std::string line; std::getline(in, line);) found = found || line == "0.5,1,0";
  EXPECT_TRUE(found);
  EXPECT_NEAR(field(r.out, "loglog_slope"), 2.0, 0.05);
}

TEST_F(Cli, GramCloseExponentsWorseConditioned) {
  const Result close = run("gram --mus 0.5,0.52 --points graded:200:2");
  const Result far = run("gram --mus 0.5,1.5 --points graded:200:2");
  ASSERT_EQ(close.code, 0) << close.out;
  ASSERT_EQ(far.code, 0) << far.out;
  EXPECT_GT(field(close.out, "gram_condition"), field(far.out, "gram_condition"));
  EXPECT_EQ(run("gram --mus 0.5,0.52 --points spiral:3").code, 1);
}

TEST_F(Cli, FitFromDataFile) {
  const fs::path data = dir_ / "points.csv";
  {
    std::ofstream f(data);
    f << "x,y\n";
    for (int i = 0; i < 200; ++i) {
      const double t = 0.1 + 0.9 * i / 199.0;
      f << t * t << ',' << t << '\n';  // y = sqrt(x)
    }
  }
  const Result r = run("fit --data " + data.string() + out());
  ASSERT_EQ(r.code, 0) << r.out;
  const double mu = field(r.out, "dominant exponent");
  EXPECT_LT(std::abs(mu - 0.5) / 0.5, 0.05) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "fit.json"));
}

TEST_F(Cli, FitCatalogTarget) {
  const Result r = run("fit --target single --K 4 --epochs 10000 --trace" + out());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(field(r.out, "dominant exponent"), 0.5, 0.025);
  const auto record = nlohmann::json::parse(std::ifstream(dir_ / "fit.json"));
  EXPECT_EQ(record.at("format"), "msn-bench-result/1");
  EXPECT_EQ(record.at("runs").size(), 1u);
  bool trace = false;
  for (const auto& e : fs::directory_iterator(dir_)) trace = trace || e.path().filename().string().starts_with("trace_");
  EXPECT_TRUE(trace);
}

TEST_F(Cli, SolvePoissonMatchesBothExponents) {
  const Result r = run("solve poisson --beta -0.5" + out());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("target 1.0000"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("target 1.5000"), std::string::npos);
  EXPECT_NE(r.out.find("success (< 5%)        yes"), std::string::npos) << r.out;
}

TEST_F(Cli, SolveCornerConstraintAware) {
  const Result r = run("solve corner --omega-deg 270 --bc DD --method constraint" + out());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(field(r.out, "dominant exponent"), 2.0 / 3.0, 2.0 / 3.0 * 1e-3);
  EXPECT_NE(r.out.find("spectrum (sin family)"), std::string::npos);
  EXPECT_NE(r.out.find("constraint violation"), std::string::npos);
}

TEST_F(Cli, ConfigFilePrecedence) {
  const fs::path cfg = dir_ / "cfg.json";
  std::ofstream(cfg) << R"({"K": 2, "schedule": {"epochs": 50}})";
  const Result r = run("fit --target single --config " + cfg.string() + " --epochs 30" + out());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto record = nlohmann::json::parse(std::ifstream(dir_ / "fit.json"));
  const auto& inst = record.at("config").at("instances").at(0);
  EXPECT_EQ(inst.at("K"), 2);
  EXPECT_EQ(inst.at("schedule").at("epochs"), 30);
  std::ofstream(cfg) << R"({"bogus": 1})";
  EXPECT_EQ(run("fit --target single --config " + cfg.string() + out()).code, 1);
}

TEST_F(Cli, BenchAndReplayAreByteIdentical) {
  const fs::path cfg = dir_ / "bench.json";
  std::ofstream(cfg) << R"({"instances": [{"schedule": {"epochs": 200}}]})";
  const Result a = run("bench three-term --seeds 0,1 --jobs 2 --config " + cfg.string() + out());
  ASSERT_EQ(a.code, 0) << a.out;
  std::stringstream first;
  first << std::ifstream(dir_ / "three-term.csv").rdbuf();
  const fs::path replay_dir = dir_ / "replay";
  fs::create_directories(replay_dir);
  const Result b = run("replay " + (dir_ / "three-term.json").string() + " --out " + replay_dir.string());
  ASSERT_EQ(b.code, 0) << b.out;
  std::stringstream second;
  second << std::ifstream(replay_dir / "three-term.csv").rdbuf();
  const std::string csv = first.str();
  EXPECT_EQ(csv, second.str());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const std::string cmd = "MSN_OUT_DIR=" + dir_.string() + " " + std::string(MSN_CLI) +
                          " fit --target single --epochs 20 > /dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "fit.json"));
}
