#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "aoc/errors.hpp"
#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(AOC_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string run_stderr(const std::string& args) {
  const std::string cmd = std::string(AOC_CLI_PATH) + " " + args + " 2>&1 >/dev/null";
  std::string s;
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) s.append(buf, n);
  pclose(pipe);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / ("aoc_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

void expect_golden(const std::string& name, const std::string& args) {
  const RunResult r = run_cli(args);
  ASSERT_EQ(r.code, 0) << args;
  EXPECT_EQ(r.out, slurp(fs::path(AOC_GOLDEN_DIR) / name)) << args;
}

}  // namespace

TEST(CliGolden, Spectrum) {
  expect_golden("spectrum.csv", "spectrum --alpha -0.2 --length 10 --modes 6");
}

TEST(CliGolden, Overlap) {
  expect_golden("overlap.csv", "overlap --alpha 0.02 --energy 1 --length 50 --method all");
}

TEST(CliGolden, Sweep) {
  expect_golden("sweep.csv", "sweep --alpha 0 --energy 1 --lengths 100:800:2");
}

TEST(CliGolden, Appendix) {
  expect_golden("appendix.csv", "appendix --alpha -0.02 --energy 1 --lengths 100,200");
}

TEST(CliHeaders, ExactColumnOrder) {
  EXPECT_EQ(first_line(run_cli("sweep --alpha 0.02 --energy 1 --lengths 50,100").out),
            "L,N,log_overlap_sq,ratio,local_slope");
  EXPECT_EQ(first_line(run_cli("spectrum --alpha 0.02 --length 50").out),
            "n,lambda_n,mu_n,theta_n,residual");
  EXPECT_EQ(first_line(run_cli("overlap --alpha 0.02 --energy 1 --length 50").out),
            "method,N,K,log_overlap_sq,tail_bound,terms");
}

TEST(CliSweep, ReportFooterIsJson) {
  const RunResult r = run_cli("sweep --alpha 0.02 --energy 1 --lengths 100:400:2");
  ASSERT_EQ(r.code, 0);
  const auto pos = r.out.find("# report ");
  ASSERT_NE(pos, std::string::npos);
  const json report = json::parse(r.out.substr(pos + 9));
  EXPECT_GT(report["zeta"].get<double>(), 0.17);
  EXPECT_TRUE(report.contains("fitted_slope_diff"));
}

TEST(CliSweep, LadderExpansion) {
  const RunResult r = run_cli("sweep --alpha 0.02 --energy 1 --lengths 100:3200:2 --format json");
  ASSERT_EQ(r.code, 0);
  const json doc = json::parse(r.out);
  const std::vector<double> expected{100, 200, 400, 800, 1600, 3200};
  EXPECT_EQ(doc["config"]["lengths"].get<std::vector<double>>(), expected);
  EXPECT_EQ(doc["records"].size(), 6u);
  EXPECT_TRUE(doc["records"][0]["local_slope"].is_null());
}

TEST(CliJson, RoundTrip) {
  for (const std::string args :
       {"overlap --alpha -0.02 --energy 1 --length 50 --method all --format json",
        "sweep --alpha 0.2 --energy 4 --lengths 25,50,100 --format json",
        "spectrum --alpha -0.2 --length 10 --modes 4 --format json",
        "appendix --alpha 0.02 --energy 1 --lengths 100 --format json"}) {
    const RunResult r = run_cli(args);
    ASSERT_EQ(r.code, 0) << args;
    const json doc = json::parse(r.out);
    EXPECT_TRUE(doc.contains("config"));
    EXPECT_TRUE(doc.contains("records"));
    EXPECT_TRUE(doc.contains("report"));
    EXPECT_EQ(json::parse(doc.dump(2)), doc);
    EXPECT_EQ(doc.dump(2) + "\n", r.out);
  }
}

TEST(CliJson, NumbersRoundTripExactly) {
  const RunResult r = run_cli("overlap --alpha 0.02 --energy 1 --length 50 --format json");
  const json doc = json::parse(r.out);
  aoc::cli::RunConfig c;
  c.alpha = 0.02;
  c.energy = 1.0;
  c.lengths = {50.0};
  const aoc::cli::Output o = aoc::cli::compute(c);
  EXPECT_EQ(doc["records"][0]["log_overlap_sq"].get<double>(),
            o.document["records"][0]["log_overlap_sq"].get<double>());
}

TEST(CliEmit, EmptyTableIsHeaderOnly) {
  aoc::cli::Table t;
  t.header = {"L", "N", "log_overlap_sq", "ratio", "local_slope"};
  EXPECT_EQ(aoc::cli::to_csv(t), "L,N,log_overlap_sq,ratio,local_slope\n");
}

TEST(CliEmit, NumberFormat) {
  EXPECT_EQ(aoc::cli::format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(aoc::cli::format_number(std::nan("")), "");
}

TEST(CliParse, Lengths) {
  EXPECT_EQ(aoc::cli::parse_lengths("100:3200:2"),
            (std::vector<double>{100, 200, 400, 800, 1600, 3200}));
  EXPECT_EQ(aoc::cli::parse_lengths("25,50.5"), (std::vector<double>{25, 50.5}));
  EXPECT_THROW(aoc::cli::parse_lengths("100:3200"), aoc::PreconditionError);
  EXPECT_THROW(aoc::cli::parse_lengths("100:50:2"), aoc::PreconditionError);
  EXPECT_THROW(aoc::cli::parse_lengths("100:3200:1"), aoc::PreconditionError);
  EXPECT_THROW(aoc::cli::parse_lengths("1,,2"), aoc::PreconditionError);
  EXPECT_THROW(aoc::cli::parse_lengths("abc"), aoc::PreconditionError);
}

TEST(CliExitCodes, Success) {
  EXPECT_EQ(run_cli("overlap --alpha 0.02 --energy 1 --length 50").code, 0);
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("verify --seeds 3 --max-dim 5").code, 0);
}

TEST(CliExitCodes, InvalidInputIsTwo) {
  EXPECT_EQ(run_cli("overlap --alpha -0.001 --length 10 --energy 1").code, 2);
  EXPECT_NE(run_stderr("overlap --alpha -0.001 --length 10 --energy 1").find("4 pi |alpha| L"),
            std::string::npos);
  EXPECT_EQ(run_cli("overlap --alpha 0.02 --length 10").code, 2);
  EXPECT_NE(run_stderr("overlap --alpha 0.02 --length 10").find("--energy"), std::string::npos);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("overlap --alpha 0.02 --energy -1 --length 10").code, 2);
  EXPECT_EQ(run_cli("overlap --alpha 0.02 --energy 1 --length 10 --method magic").code, 2);
  EXPECT_EQ(run_cli("sweep --alpha 0.02 --energy 1 --lengths 400,200").code, 2);
  EXPECT_EQ(run_cli("sweep --alpha 0.02 --energy 1 --lengths 100 --schedule fast").code, 2);
  EXPECT_EQ(run_cli("sweep --alpha 0.02 --energy 1 --lengths 2,3").code, 2);
  EXPECT_EQ(run_cli("overlap --alpha 0.02 --energy 1 --length 1").code, 2);
  EXPECT_EQ(run_cli("overlap --alpha nan --energy 1 --length 50").code, 2);
  EXPECT_EQ(run_cli("verify --max-dim 1").code, 2);
}

TEST(CliExitCodes, NumericalOrIoIsThree) {
  EXPECT_EQ(run_cli("overlap --alpha 0.02 --energy 1 --length 50 --out /nonexistent/dir/x.csv").code,
            3);
  EXPECT_EQ(run_cli("overlap --alpha 0.02 --energy 1 --length 50 --out /tmp").code, 3);
}

TEST(CliDeterminism, ByteIdenticalFiles) {
  const fs::path dir = temp_dir();
  const std::vector<std::string> configs{
      "sweep --alpha -0.02 --energy 1 --lengths 50:400:2 --method product",
      "overlap --alpha 0.2 --energy 4 --length 100 --method all --format json",
      "verify --seeds 5 --max-dim 6 --format json"};
  int i = 0;
  for (const std::string& args : configs) {
    const fs::path a = dir / ("a" + std::to_string(i));
    const fs::path b = dir / ("b" + std::to_string(i));
    ASSERT_EQ(run_cli(args + " --out " + a.string()).code, 0);
    ASSERT_EQ(run_cli(args + " --out " + b.string(), "AOC_THREADS=3").code, 0);
    EXPECT_EQ(slurp(a), slurp(b)) << args;
    EXPECT_FALSE(slurp(a).empty());
    ++i;
  }
  fs::remove_all(dir);
}
