#include <gtest/gtest.h>

#include "support.hpp"

using namespace mcmpipe;
using testsupport::run_cli;
using testsupport::slurp;
using testsupport::TempDir;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::size_t at = 0;
  while (at < s.size()) {
    auto nl = s.find('\n', at);
    out.push_back(s.substr(at, nl - at));
    at = nl + 1;
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char d = ',') {
  std::vector<std::string> out;
  std::size_t at = 0;
  for (;;) {
    auto p = s.find(d, at);
    out.push_back(s.substr(at, p - at));
    if (p == std::string::npos) break;
    at = p + 1;
  }
  return out;
}

}  // namespace

TEST(Cli, ScheduleWritesThreeFiles) {
  TempDir dir("sched");
  auto r = run_cli("schedule --net alexnet --chiplets 16 --method scope --samples 64 --out " + dir.path.string());
  EXPECT_EQ(r.code, 0) << r.output;
  for (auto f : {"schedule.json", "report.json", "layers.csv"}) EXPECT_TRUE(std::filesystem::exists(dir.path / f)) << f;
  EXPECT_NE(r.output.find("throughput"), std::string::npos);
  auto report = json::parse(slurp(dir.path / "report.json"));
  for (auto key : {"t_system", "m_samples", "energy", "chiplet_peak_weight_bytes", "segments"})
    EXPECT_TRUE(report["report"].contains(key)) << key;
  EXPECT_EQ(report["method"], "scope");
}

TEST(Cli, FullPipelineOverflowExitsTwo) {
  TempDir dir("fp");
  auto r = run_cli("schedule --net resnet152 --chiplets 16 --method full_pipeline --out " + dir.path.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("overflow"), std::string::npos) << r.output;
}

TEST(Cli, MalformedNetworkExitsOne) {
  TempDir dir("mal");
  write_text_atomic(dir.path / "n.json", R"({"name":"x","layers":[{"kind":"conv","c_in":3,"h_in":8}]})");
  auto r = run_cli("schedule --net " + (dir.path / "n.json").string() + " --out " + dir.path.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("layers[0].c_out"), std::string::npos) << r.output;
  EXPECT_EQ(run_cli("schedule --net nosuchnet").code, 1);
  EXPECT_EQ(run_cli("schedule --net toy5 --method warp").code, 1);
}

TEST(Cli, CompareSweepShape) {
  TempDir dir("cmp");
  auto r = run_cli("compare --net resnet152 --chiplets 16,64,256 --samples 64 --out " + dir.path.string());
  EXPECT_EQ(r.code, 0) << r.output;
  auto rows = lines(slurp(dir.path / "compare.csv"));
  ASSERT_EQ(rows.size(), 13u);
  std::map<std::string, double> lat;
  int infeasible = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto f = split(rows[i]);
    if (f[3] == "infeasible") {
      ++infeasible;
      continue;
    }
    lat[f[1] + "/" + f[2]] = std::stod(f[4]);
  }
  EXPECT_GE(infeasible, 1);
  for (auto c : {"16", "64", "256"}) EXPECT_LE(lat.at(std::string(c) + "/scope"), lat.at(std::string(c) + "/segmented"));

  auto norm = lines(slurp(dir.path / "normalized.csv"));
  ASSERT_EQ(norm.size(), 13u);
  std::map<std::string, double> thr;
  for (std::size_t i = 1; i < norm.size(); ++i) {
    auto f = split(norm[i]);
    if (!f[3].empty()) thr[f[1] + "/" + f[2]] = std::stod(f[3]);
  }
  for (std::size_t i = 1; i < norm.size(); ++i) {
    auto f = split(norm[i]);
    if (f[4].empty()) continue;
    EXPECT_DOUBLE_EQ(std::stod(f[4]), thr.at(f[1] + "/" + f[2]) / thr.at(f[1] + "/16"));
  }
}

TEST(Cli, ValidateToyAndTooLarge) {
  TempDir dir("val");
  auto r = run_cli("validate --net toy5 --chiplets 8 --out " + dir.path.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("rank"), std::string::npos);
  auto dist = lines(slurp(dir.path / "distribution.csv"));
  EXPECT_EQ(dist.front(), "candidate_id,latency,feasible");
  EXPECT_EQ(dist.size(), 1u + 10'560u);

  auto big = run_cli("validate --net resnet152 --chiplets 256 --out " + dir.path.string());
  EXPECT_EQ(big.code, 3);
  EXPECT_NE(big.output.find(design_space_size(152, 256).str()), std::string::npos);

  auto capped = run_cli("validate --net toy5 --chiplets 8 --out " + dir.path.string(), "SCOPE_MAX_ENUM=1000");
  EXPECT_EQ(capped.code, 3);
}

TEST(Cli, ValidateOneLayerRankZero) {
  TempDir dir("one");
  auto r = run_cli("validate --net toy5 --layers 0:1 --chiplets 8 --out " + dir.path.string());
  EXPECT_EQ(r.code, 0) << r.output;
  auto rows = lines(slurp(dir.path / "validate_summary.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(split(rows[1]).back(), "0");
}

TEST(Cli, BreakdownTwoCsvs) {
  TempDir dir("brk");
  auto r = run_cli("breakdown --net resnet152 --chiplets 256 --method scope,segmented --out " + dir.path.string());
  EXPECT_EQ(r.code, 0) << r.output;
  auto energy = lines(slurp(dir.path / "energy.csv"));
  ASSERT_EQ(energy.size(), 3u);
  EXPECT_EQ(split(energy[1])[0], "scope");
  EXPECT_EQ(split(energy[1])[4], "1");
  EXPECT_GT(lines(slurp(dir.path / "loads.csv")).size(), 2u);
}

TEST(Cli, BreakdownSingleLayer) {
  TempDir dir("brk1");
  write_text_atomic(dir.path / "n.json",
                    R"({"name":"one","layers":[{"kind":"conv","c_in":8,"c_out":8,"h_in":8,"k":3,"pad":1}]})");
  auto r = run_cli("breakdown --net " + (dir.path / "n.json").string() + " --chiplets 4 --out " + dir.path.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(lines(slurp(dir.path / "loads.csv")).size(), 3u);
}

TEST(Cli, Count) {
  auto r = run_cli("count --layers 2 --chiplets 2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.output, "8\n");
}
