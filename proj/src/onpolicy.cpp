#include "policy_delta/onpolicy.hpp"

#include <cmath>
#include <string>

#include "policy_delta/summation.hpp"

namespace policy_delta {
namespace {

void CheckPaired(std::span<const double> y, std::span<const double> fx) {
  if (y.size() != fx.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "outcomes and predictions differ in length");
  }
  if (y.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "need at least two pairs");
  }
}

// Centered second moments, all over the same divisor.
struct Moments {
  double var_y = 0.0;
  double var_f = 0.0;
  double cov = 0.0;
};

Moments PairedMoments(std::span<const double> y, std::span<const double> fx) {
  const double mean_y = SampleMean(y);
  const double mean_f = SampleMean(fx);
  CompensatedSum syy, sff, syf;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dy = y[i] - mean_y;
    const double df = fx[i] - mean_f;
    syy.Add(dy * dy);
    sff.Add(df * df);
    syf.Add(dy * df);
  }
  return {syy.Total(), sff.Total(), syf.Total()};
}

}  // namespace

AdjustedSample MakeSample(const Dataset& arm, const RewardModel* model) {
  AdjustedSample sample;
  sample.label = model ? SampleLabel::kAdjusted : SampleLabel::kRaw;
  sample.values.reserve(arm.size());
  for (const auto& r : arm.records()) {
    const double value = model ? r.reward - model->Predict(r) : r.reward;
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kNonFiniteReward,
                  "adjusted outcome of record " + std::to_string(r.row) +
                      " is not finite");
    }
    sample.values.push_back(value);
  }
  return sample;
}

double SampleMean(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "mean of an empty sample");
  }
  return StableSum(values) / static_cast<double>(values.size());
}

double SampleVariance(std::span<const double> values, int dof_loss) {
  if (dof_loss < 0) {
    throw Error(ErrorCode::kInvalidConfig, "dof_loss must be >= 0");
  }
  if (values.size() <= static_cast<std::size_t>(dof_loss)) {
    throw Error(ErrorCode::kInsufficientData,
                "variance with dof_loss " + std::to_string(dof_loss) +
                    " needs more than " + std::to_string(dof_loss) +
                    " values, got " + std::to_string(values.size()));
  }
  const double mean = SampleMean(values);
  return SumSquaredDeviations(values, mean) /
         static_cast<double>(values.size() - static_cast<std::size_t>(dof_loss));
}

EstimateResult DifferenceInMeans(std::span<const double> a,
                                 std::span<const double> b, double ci_level) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "difference in means needs at least two records per arm");
  }
  const double point = SampleMean(a) - SampleMean(b);
  const double variance =
      SampleVariance(a, 1) / static_cast<double>(a.size()) +
      SampleVariance(b, 1) / static_cast<double>(b.size());
  return MakeEstimate(point, variance, /*dof_loss=*/2, a.size() + b.size(),
                      ci_level);
}

EstimateResult DimEstimate(const Dataset& treatment, const Dataset& control,
                           double ci_level) {
  return DifferenceInMeans(MakeSample(treatment).values,
                           MakeSample(control).values, ci_level);
}

EstimateResult RadimEstimate(const Dataset& treatment, const Dataset& control,
                             const RewardModel& model, double ci_level) {
  if (!model.action_agnostic()) {
    throw Error(ErrorCode::kActionAwareModelRejected,
                "regression adjustment needs an action-agnostic model");
  }
  return DifferenceInMeans(MakeSample(treatment, &model).values,
                           MakeSample(control, &model).values, ci_level);
}

double FitScalingCoefficient(std::span<const double> y,
                             std::span<const double> fx) {
  CheckPaired(y, fx);
  const Moments m = PairedMoments(y, fx);
  if (m.var_f == 0.0) {
    throw Error(ErrorCode::kZeroVariancePredictor, "predictions are constant");
  }
  return m.cov / m.var_f;
}

double ResidualVarianceRatio(std::span<const double> y,
                             std::span<const double> fx) {
  CheckPaired(y, fx);
  const Moments m = PairedMoments(y, fx);
  if (m.var_y == 0.0) {
    throw Error(ErrorCode::kZeroVarianceOutcome, "outcomes are constant");
  }
  const double theta = FitScalingCoefficient(y, fx);
  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - theta * fx[i];
  const double mean = SampleMean(residual);
  return SumSquaredDeviations(residual, mean) / m.var_y;
}

double Correlation(std::span<const double> y, std::span<const double> fx) {
  CheckPaired(y, fx);
  const Moments m = PairedMoments(y, fx);
  if (m.var_y == 0.0) {
    throw Error(ErrorCode::kZeroVarianceOutcome, "outcomes are constant");
  }
  if (m.var_f == 0.0) {
    throw Error(ErrorCode::kZeroVariancePredictor, "predictions are constant");
  }
  return m.cov / std::sqrt(m.var_y * m.var_f);
}

}  // namespace policy_delta
