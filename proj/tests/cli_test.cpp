#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "policy_delta/cli.hpp"
#include "policy_delta/equivalence.hpp"
#include "policy_delta/io.hpp"
#include "policy_delta/offpolicy.hpp"
#include "policy_delta/report.hpp"

namespace policy_delta {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("policy_delta_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::string Write(const std::string& name, const std::string& text) const {
    std::ofstream(Path(name)) << text;
    return Path(name);
  }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return RunCli(args, out_, err_);
  }

  json Output() const { return json::parse(out_.str()); }

  std::string AbConfig(std::size_t n = 1000) const {
    return Write("ab.cfg", "n = " + std::to_string(n) +
                               "\nseed = 11\nframing = AB\np = 0.5\nate = 0.3\n"
                               "rho = 0.6\n");
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::size_t Lines(const std::string& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string Slurp(const std::string& path) { return ReadTextFile(path); }

TEST_F(Cli, SimulateWritesOneLinePerRecord) {
  ASSERT_EQ(Run({"simulate", "--config", AbConfig(), "--out", Path("d.jsonl")}),
            kExitOk);
  EXPECT_EQ(Lines(Path("d.jsonl")), 1000u);
  EXPECT_EQ(Output().at("n"), 1000);
  EXPECT_TRUE(Output().contains("realised_p"));
}

TEST_F(Cli, SimulateIsDeterministic) {
  const std::string cfg = AbConfig(300);
  ASSERT_EQ(Run({"simulate", "--config", cfg, "--out", Path("a.jsonl")}), 0);
  ASSERT_EQ(Run({"simulate", "--config", cfg, "--out", Path("b.jsonl")}), 0);
  EXPECT_EQ(Slurp(Path("a.jsonl")), Slurp(Path("b.jsonl")));
}

TEST_F(Cli, MalformedConfigNamesKey) {
  const std::string cfg =
      Write("bad.json", R"({"n": 100, "framing": "AB", "rho": 0.5,, "p": 0.5})");
  EXPECT_EQ(Run({"simulate", "--config", cfg, "--out", Path("x.jsonl")}),
            kExitBadInput);
  EXPECT_NE(err_.str().find("rho"), std::string::npos) << err_.str();
}

TEST_F(Cli, IoErrorsExitThree) {
  EXPECT_EQ(Run({"simulate", "--config", Path("missing.cfg"), "--out",
                 Path("x.jsonl")}),
            kExitIo);
  EXPECT_EQ(Run({"simulate", "--config", AbConfig(), "--out",
                 Path("no/such/dir/x.jsonl")}),
            kExitIo);
}

TEST_F(Cli, EstimateDimReportsDofTwo) {
  ASSERT_EQ(Run({"simulate", "--config", AbConfig(), "--out", Path("d.jsonl")}), 0);
  ASSERT_EQ(Run({"estimate", "--data", Path("d.jsonl"), "--estimator", "dim"}), 0);
  const RunReport r = Output().get<RunReport>();
  ASSERT_EQ(r.results.size(), 1u);
  EXPECT_EQ(std::get<EstimateResult>(r.results[0].result).dof_loss, 2);
}

TEST_F(Cli, OffPolicyEstimatorOnAbDataNeedsAsOpe) {
  ASSERT_EQ(Run({"simulate", "--config", AbConfig(), "--out", Path("d.jsonl")}), 0);
  EXPECT_EQ(Run({"estimate", "--data", Path("d.jsonl"), "--estimator", "dips"}),
            kExitBadInput);
  EXPECT_EQ(Run({"estimate", "--data", Path("d.jsonl"), "--estimator", "dips",
                 "--as-ope"}),
            kExitOk);
}

TEST_F(Cli, AutoBetaIsEchoedAndMatchesPlugin) {
  ASSERT_EQ(Run({"simulate", "--config", AbConfig(), "--out", Path("d.jsonl")}), 0);
  ASSERT_EQ(Run({"estimate", "--data", Path("d.jsonl"), "--estimator", "dbips",
                 "--as-ope", "--beta", "auto", "--dof-loss", "2"}),
            0);
  const json j = Output();
  const double echoed = j.at("config_echo").at("beta").get<double>();

  const Dataset data = ValidateDataset(ReadRecords(Path("d.jsonl")), Framing::kAB);
  const ABExperiment exp(data, 0.5);
  const double plugin = EstimateBetaStar(AbToOpe(exp, PropensityMode::kEmpirical),
                                         TreatmentPolicy(), ControlPolicy());
  EXPECT_NEAR(echoed, plugin, 1e-12);
  EXPECT_EQ(j.at("results")[0].at("dof_loss"), 2);
}

TEST_F(Cli, ZeroPropensityExitsFour) {
  const std::string data = Write(
      "ope.jsonl",
      R"({"context_id":0,"covariates":[],"action":0,"reward":1,"propensity":0})"
      "\n");
  const std::string pol = Write("pi.json", "[[1, 0]]");
  EXPECT_EQ(Run({"estimate", "--data", data, "--estimator", "dips", "--policy",
                 pol, "--policy-prime", pol}),
            kExitZeroPropensity);
}

TEST_F(Cli, MaxWeightMarksReportBiased) {
  const std::string data = Write(
      "ope.jsonl",
      R"({"context_id":0,"covariates":[],"action":0,"reward":1,"propensity":0.1})"
      "\n"
      R"({"context_id":0,"covariates":[],"action":1,"reward":2,"propensity":0.9})"
      "\n");
  const std::string pi = Write("pi.json", "[[1, 0]]");
  const std::string alt = Write("alt.json", "[[0, 1]]");
  ASSERT_EQ(Run({"estimate", "--data", data, "--estimator", "dips", "--policy",
                 pi, "--policy-prime", alt, "--max-weight", "5"}),
            0);
  EXPECT_TRUE(Output().at("biased").get<bool>());
  EXPECT_FALSE(Output().at("warnings").empty());
}

void WriteBalanced(const std::string& path, std::size_t half, double p) {
  std::mt19937_64 rng(31);
  const Dataset d = ValidateDataset(oracle::RandomAbRecords(half, half, p, rng),
                                    Framing::kAB);
  WriteDataset(path, d);
}

TEST_F(Cli, VerifyBalancedIsExact) {
  WriteBalanced(Path("bal.jsonl"), 250, 0.5);
  ASSERT_EQ(Run({"verify", "--data", Path("bal.jsonl"), "--which", "dim",
                 "--mode", "empirical", "--dof-loss", "2", "--expect", "exact"}),
            kExitOk);
  EXPECT_EQ(Output().at("results")[0].at("verdict"), "ExactMatch");
}

TEST_F(Cli, VerifyDofOneCarriesBesselRatio) {
  WriteBalanced(Path("bal.jsonl"), 250, 0.5);
  Run({"verify", "--data", Path("bal.jsonl"), "--mode", "empirical",
       "--dof-loss", "1"});
  const double ratio = Output().at("results")[0].at("variance_ratio");
  EXPECT_NEAR(ratio, 499.0 / 498.0, 1e-12);
}

TEST_F(Cli, VerifyUnbalancedIsApproximate) {
  const std::string cfg = Write(
      "p2.cfg", "n = 5000\nseed = 2\nframing = AB\np = 0.2\nrho = 0.5\n");
  ASSERT_EQ(Run({"verify", "--config", cfg, "--which", "radim"}), kExitOk);
  const json res = Output().at("results")[0];
  EXPECT_EQ(res.at("verdict"), "ApproxMatch");
  EXPECT_GT(res.at("variance_rel_diff").get<double>(), 0.0);
  EXPECT_EQ(Run({"verify", "--config", cfg, "--which", "radim", "--expect",
                 "exact"}),
            kExitMismatch);
}

TEST_F(Cli, SweepWritesCsvAndIsDeterministic) {
  const std::string cfg = AbConfig(200);
  ASSERT_EQ(Run({"sweep", "--config", cfg, "--sweep", "rho=0,0.8",
                 "--replications", "20", "--out", Path("a.csv")}),
            0);
  ASSERT_EQ(Run({"sweep", "--config", cfg, "--sweep", "rho=0,0.8",
                 "--replications", "20", "--out", Path("b.csv")}),
            0);
  EXPECT_EQ(Lines(Path("a.csv")), 3u);
  EXPECT_EQ(Slurp(Path("a.csv")), Slurp(Path("b.csv")));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(Run({"estimate", "--estimator", "magic", "--data", "x"}),
            kExitBadInput);
  EXPECT_EQ(Run({"bogus"}), kExitBadInput);
  EXPECT_EQ(Run({"verify", "--data", "x", "--dof-loss", "3"}), kExitBadInput);
}

}  // namespace
}  // namespace policy_delta
