#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "policy_delta/core_data.hpp"
#include "policy_delta/equivalence.hpp"
#include "policy_delta/synthgen.hpp"

namespace policy_delta {
namespace {

LoggedRecord Ab(const char* arm, double y, double p = 0.5) {
  LoggedRecord r;
  r.arm = arm;
  r.action = std::string(arm) == "T" ? 0 : 1;
  r.reward = y;
  r.logging_propensity = p;
  return r;
}

LoggedRecord Ope(int action, double y, double p) {
  LoggedRecord r;
  r.action = action;
  r.reward = y;
  r.logging_propensity = p;
  return r;
}

template <typename F>
ErrorCode CodeOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoError;
}

TEST(ValidateDataset, AcceptsTwoArmRecords) {
  const Dataset d = ValidateDataset({Ab("T", 1.0), Ab("C", 2.0)}, Framing::kAB);
  EXPECT_EQ(d.framing(), Framing::kAB);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.arm_labels(), (ArmLabels{"T", "C"}));
  EXPECT_EQ(d.records()[1].row, 1u);
}

TEST(ValidateDataset, RejectsBadPropensities) {
  for (double p : {0.0, -0.1, 1.5, std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::infinity()}) {
    EXPECT_EQ(CodeOf([&] { ValidateDataset({Ope(0, 1.0, p)}, Framing::kOPE); }),
              ErrorCode::kNonFinitePropensity)
        << p;
  }
}

TEST(ValidateDataset, RejectsNonFiniteReward) {
  EXPECT_EQ(CodeOf([] {
              ValidateDataset({Ope(0, std::nan(""), 0.5)}, Framing::kOPE);
            }),
            ErrorCode::kNonFiniteReward);
}

TEST(ValidateDataset, RejectsActionOutOfRange) {
  DatasetOptions options;
  options.action_count = 3;
  EXPECT_EQ(CodeOf([&] {
              ValidateDataset({Ope(5, 1.0, 0.5)}, Framing::kOPE, options);
            }),
            ErrorCode::kActionOutOfRange);
}

TEST(ValidateDataset, RejectsEmptyAndUnknownLabels) {
  EXPECT_EQ(CodeOf([] { ValidateDataset({}, Framing::kOPE); }),
            ErrorCode::kEmptyDataset);
  EXPECT_EQ(CodeOf([] {
              ValidateDataset({Ab("T", 1), Ab("C", 1), Ab("X", 1)},
                              Framing::kAB);
            }),
            ErrorCode::kUnknownArmLabel);
}

TEST(SplitByArm, Partitions) {
  const Dataset d =
      ValidateDataset({Ab("T", 1), Ab("C", 2), Ab("T", 3)}, Framing::kAB);
  const auto [t, c] = SplitByArm(d);
  ASSERT_EQ(t.size(), 2u);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(t.records()[0].reward, 1);
  EXPECT_EQ(t.records()[1].reward, 3);
  EXPECT_EQ(c.records()[0].reward, 2);
  // Rows keep their position in the parent dataset.
  EXPECT_EQ(t.records()[1].row, 2u);
}

TEST(SplitByArm, EmptyArmAndWrongFraming) {
  const Dataset all_t = ValidateDataset({Ab("T", 1), Ab("T", 2)}, Framing::kAB,
                                        {std::nullopt, ArmLabels{"T", "C"}});
  EXPECT_EQ(CodeOf([&] { SplitByArm(all_t); }), ErrorCode::kEmptyArm);
  const Dataset ope = ValidateDataset({Ope(0, 1, 0.5)}, Framing::kOPE);
  EXPECT_EQ(CodeOf([&] { SplitByArm(ope); }), ErrorCode::kWrongFraming);
}

TEST(SplitByArm, SizesSumToGeneratorCount) {
  SyntheticConfig cfg;
  cfg.n = 1000;
  cfg.seed = 7;
  cfg.p = 0.5;
  const auto [exp, model] = GenAbExperiment(cfg);
  const auto [t, c] = SplitByArm(exp.data());
  EXPECT_EQ(t.size() + c.size(), 1000u);
  EXPECT_EQ(t.size(), exp.treatment_count());
}

TEST(PolicyTable, ValidatesRows) {
  EXPECT_EQ(CodeOf([] { PolicyTable({{0.5, 0.6}}); }), ErrorCode::kInvalidPolicy);
  EXPECT_EQ(CodeOf([] { PolicyTable({{1.2, -0.2}}); }),
            ErrorCode::kInvalidPolicy);
  const PolicyTable u = PolicyTable::Uniform(4);
  EXPECT_DOUBLE_EQ(u.Prob(17, 3), 0.25);
  EXPECT_EQ(CodeOf([&] { u.Prob(0, 4); }), ErrorCode::kUnknownActionSet);
  const PolicyTable m = PolicyTable::Mixture(0.25, PolicyTable::PointMass(0, 2),
                                             PolicyTable::PointMass(1, 2));
  EXPECT_DOUBLE_EQ(m.Prob(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(m.Prob(0, 1), 0.75);
}

TEST(RewardModel, AgnosticIgnoresAction) {
  LoggedRecord r;
  r.covariates = {2.0, -1.0};
  const RewardModel f = RewardModel::Linear(0.5, {1.0, 3.0});
  EXPECT_DOUBLE_EQ(f.Predict(r), -0.5);
  EXPECT_DOUBLE_EQ(f.Predict(r, 0), f.Predict(r, 1));
  EXPECT_DOUBLE_EQ(f.Shifted(1.0).Predict(r), 0.5);

  const RewardModel aware = RewardModel::ActionTable({{1.0, 2.0}});
  EXPECT_FALSE(aware.action_agnostic());
  EXPECT_EQ(CodeOf([&] { aware.Predict(r); }),
            ErrorCode::kActionAwareModelRejected);
  EXPECT_DOUBLE_EQ(aware.Predict(r, 1), 2.0);
}

TEST(TruePolicyValue, HandExamples) {
  const std::vector<double> one_context = {1.0};
  EXPECT_DOUBLE_EQ(TruePolicyValue(PolicyTable::PointMass(1, 2), one_context,
                                   {{7.0, 3.0}}),
                   3.0);
  EXPECT_DOUBLE_EQ(
      TruePolicyValue(PolicyTable::Uniform(2), one_context, {{0.0, 2.0}}), 1.0);
  EXPECT_EQ(CodeOf([&] {
              TruePolicyValue(PolicyTable::Uniform(2), one_context,
                              {{0.0, std::numeric_limits<double>::infinity()}});
            }),
            ErrorCode::kNonFiniteExpectedReward);
}

TEST(TruePolicyValue, MatchesBruteForceAndDifferenceVanishesOnSelf) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int xs = 1 + trial % 4;
    const int as = 2 + trial % 3;
    std::vector<std::vector<double>> pi(xs), reward(xs);
    std::vector<double> px(xs);
    double px_total = 0;
    for (int x = 0; x < xs; ++x) {
      double total = 0;
      for (int a = 0; a < as; ++a) {
        pi[x].push_back(unit(rng));
        total += pi[x].back();
        reward[x].push_back(10 * unit(rng) - 5);
      }
      for (double& v : pi[x]) v /= total;
      px[x] = unit(rng) + 0.1;
      px_total += px[x];
    }
    for (double& v : px) v /= px_total;
    const PolicyTable policy(pi);
    const double v = TruePolicyValue(policy, px, reward);
    EXPECT_NEAR(v, static_cast<double>(oracle::Value(pi, px, reward)), 1e-12);
    EXPECT_EQ(v - TruePolicyValue(policy, px, reward), 0.0);
  }
}

TEST(MakeEstimate, SymmetricNormalInterval) {
  const EstimateResult e = MakeEstimate(1.0, 0.04, 1, 10, 0.95);
  EXPECT_DOUBLE_EQ(e.std_error, 0.2);
  EXPECT_NEAR(e.ci_high - 1.0, 1.959963984540054 * 0.2, 1e-12);
  EXPECT_NEAR(1.0 - e.ci_low, e.ci_high - 1.0, 1e-15);
}

}  // namespace
}  // namespace policy_delta
