#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>

#include "torus/cli.hpp"

using namespace torus;
using Json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

void expect_keys(const Json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) EXPECT_TRUE(j.contains(k)) << k << " missing in " << j.dump();
}

}  // namespace

TEST(Cli, TreesExample) {
  const auto r = run({"trees", "--matrix", "3,0;0,3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = r.json();
  EXPECT_EQ(j["tau"], "11664");
  EXPECT_EQ(j["det"], "9");
  EXPECT_EQ(j["det_star"], "104976");
  EXPECT_EQ(j["method"], "exact");
}

TEST(Cli, TreesBigIntegersAreStrings) {
  const auto j = run({"trees", "--matrix", "30,0;0,30"}).json();
  EXPECT_TRUE(j["tau"].is_string());
  EXPECT_GT(j["tau"].get<std::string>().size(), 300u);
}

TEST(Cli, TreesFloatPath) {
  const auto j = run({"trees", "--matrix", "3,0;0,3", "--float"}).json();
  EXPECT_EQ(j["method"], "float");
  EXPECT_NEAR(j["log_det_star"].get<double>(), std::log(104976.0), 1e-12);
  EXPECT_NEAR(j["log_tau"].get<double>(), std::log(11664.0), 1e-12);
}

TEST(Cli, SingularMatrixIsDomainError) {
  const auto r = run({"trees", "--matrix", "1,2;2,4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("singular matrix"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, CConstExample) {
  const auto r = run({"c-const", "--r", "2"});
  ASSERT_EQ(r.code, 0);
  const Json j = r.json();
  EXPECT_EQ(j["r"], 2);
  EXPECT_NEAR(j["value"].get<double>(), 1.16624362, 1e-7);
  EXPECT_LT(j["err"].get<double>(), 1e-7);
  EXPECT_EQ(run({"c-const", "--r", "9"}).code, 1);
}

TEST(Cli, UsageErrorsPrintGrammar) {
  for (const std::vector<std::string>& args :
       std::vector<std::vector<std::string>>{{},
                                             {"frobnicate"},
                                             {"trees"},
                                             {"trees", "--matrix"},
                                             {"trees", "--matrix", "1,2;3"},
                                             {"trees", "--matrix", "2", "--json", "--csv"},
                                             {"trees", "--matrix", "2", "--exact", "--float"},
                                             {"theta", "--matrix", "2"},
                                             {"c-const", "--r", "two"},
                                             {"verify-theorem1", "--matrix", "1,0;0,1"},
                                             {"trees", "--matrix", "2", "--bogus"}}) {
    const auto r = run(args);
    EXPECT_EQ(r.code, 2) << ::testing::PrintToString(args);
    EXPECT_NE(r.err.find("usage: torus <subcommand>"), std::string::npos);
  }
}

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("verify-theorem1"), std::string::npos);
}

TEST(Cli, CsvOutput) {
  const auto r = run({"trees", "--matrix", "3,0;0,3", "--csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "tau,det,det_star,log_det_star,method\n11664,9,104976,11.5614870315847,exact\n");
  const auto s = run({"spectrum", "--matrix", "2,1;0,2", "--csv"});
  EXPECT_EQ(s.out, "v1,v2,lambda\n0,0,0\n1/2,3/4,6\n0,1/2,4\n1/2,1/4,6\n");
}

TEST(Cli, Spectrum) {
  const auto j = run({"spectrum", "--matrix", "4"}).json();
  EXPECT_EQ(j["zero_multiplicity"], 1);
  ASSERT_EQ(j["eigenvalues"].size(), 4u);
  EXPECT_EQ(j["eigenvalues"][1]["v"][0], "1/4");
  EXPECT_NEAR(j["eigenvalues"][2]["lambda"].get<double>(), 4.0, 1e-14);
}

TEST(Cli, Theta) {
  const auto d = run({"theta", "--matrix", "2", "--t", "0.1"}).json();
  expect_keys(d, {"t", "det", "spectral", "bessel", "truncation_radius"});
  EXPECT_NEAR(d["spectral"].get<double>(), 1.67032004603564, 1e-14);
  const auto c = run({"theta", "--lattice", "hexagonal", "--t", "0.02"}).json();
  EXPECT_EQ(c["branch"], "geometric");
  EXPECT_NEAR(c["value"].get<double>(), 3.97888644231810, 1e-12);
  EXPECT_EQ(run({"theta", "--matrix", "2", "--t", "-1"}).code, 1);
}

TEST(Cli, Height) {
  const auto j = run({"height", "--lattice", "hexagonal"}).json();
  expect_keys(j, {"r", "log_det_star", "height", "zeta_log_det_star", "ss_margin"});
  EXPECT_NEAR(j["log_det_star"].get<double>(), -1.03351927596262, 1e-10);
  const auto sq = run({"height", "--matrix", "5,0;0,5"}).json();  // normalized first
  EXPECT_NEAR(sq["log_det_star"].get<double>(), -1.05468828099567, 1e-10);
  const auto cube = run({"height", "--r", "3"}).json();
  EXPECT_EQ(cube["r"], 3);
}

TEST(Cli, Identity) {
  const auto j = run({"identity", "--matrix", "2", "--s", "1"}).json();
  EXPECT_NEAR(j["lhs"].get<double>(), std::log(5.0), 1e-14);
  EXPECT_LT(j["residual"].get<double>(), 1e-8);
  const auto z = run({"identity", "--matrix", "2,0;0,2"}).json();
  EXPECT_NEAR(z["exact_lhs"].get<double>(), std::log(128.0), 1e-13);
}

TEST(Cli, Bound) {
  const auto j = run({"bound", "--matrix", "3,0;0,3"}).json();
  EXPECT_EQ(j["holds"], true);
  EXPECT_NEAR(j["slack"].get<double>(), 0.178, 1e-3);
}

TEST(Cli, VerifyTheorem1FromMatrix) {
  const auto r = run({"verify-theorem1", "--matrix", "1,0;0,1", "--n-min", "2", "--n-max", "6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = r.json();
  ASSERT_EQ(j["records"].size(), 5u);
  expect_keys(j["records"][0], {"n", "det", "log_det_star", "method", "predicted", "residual", "wall_ms"});
  expect_keys(j["summary"], {"c_r", "final_abs_residual", "decreasing_last_half"});
  const auto csv = run({"verify-theorem1", "--matrix", "1,0;0,1", "--n-min", "2", "--n-max", "3", "--csv"});
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "n,det,log_det_star,method,predicted,residual,wall_ms");
}

TEST(Cli, VerifyTheorem1FromConfig) {
  const auto dir = std::filesystem::temp_directory_path() / ("torus-cli-" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "sweep.ini";
  write_file(cfg, "[sequence]\nkind = scaled\nbase = 2,1;0,2\nn_min = 1\nn_max = 4\n[output]\ndir = " +
                      (dir / "runs").string() + "\n");
  const auto r = run({"verify-theorem1", "--config", cfg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = r.json();
  EXPECT_EQ(j["run_dir"], (dir / "runs" / "run-001").string());
  EXPECT_TRUE(std::filesystem::exists(dir / "runs" / "run-001" / "records.csv"));

  write_file(cfg, "[sequence]\nkind = scaled\nbase = 2,1;0,2\nn_min 1\n");
  const auto bad = run({"verify-theorem1", "--config", cfg.string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 4"), std::string::npos);
  write_file(cfg, "");
  EXPECT_EQ(run({"verify-theorem1", "--config", cfg.string()}).code, 2);
  std::filesystem::remove_all(dir);
}

TEST(Cli, Compare) {
  const auto j = run({"compare", "--n-min", "2", "--n-max", "8"}).json();
  EXPECT_EQ(j["a"], "hexagonal");
  EXPECT_EQ(j["b"], "matched_rectangles");
  EXPECT_EQ(j["rows"].size(), 7u);
  EXPECT_EQ(j["winner_at_largest"], 1);
  EXPECT_EQ(j["advisory"], true);
}

TEST(Cli, ShortestVector) {
  const auto j = run({"shortest-vector", "--lattice", "fcc"}).json();
  EXPECT_NEAR(j["norm2"].get<double>(), std::cbrt(2.0), 1e-12);
  const auto m = run({"shortest-vector", "--matrix", "1,0.5;0,2"}).json();
  EXPECT_NEAR(m["length"].get<double>(), 1.0, 1e-14);
}

TEST(Cli, MaxCosetsEnvironment) {
  ::setenv("TORUS_MAX_COSETS", "5", 1);
  const auto r = run({"trees", "--matrix", "3,0;0,3"});
  const auto s = run({"spectrum", "--matrix", "3"});
  ::setenv("TORUS_MAX_COSETS", "zero", 1);
  const auto bad = run({"trees", "--matrix", "2"});
  ::unsetenv("TORUS_MAX_COSETS");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cap"), std::string::npos);
  EXPECT_EQ(s.code, 0);
  EXPECT_EQ(bad.code, 2);
}

TEST(Cli, NumbersHaveFifteenDigits) {
  const auto r = run({"c-const", "--r", "3"});
  EXPECT_NE(r.out.find("1.6733893029702"), std::string::npos);
  EXPECT_EQ(r.out.find("1.67338930297019"), std::string::npos);  // no 16th digit
}
