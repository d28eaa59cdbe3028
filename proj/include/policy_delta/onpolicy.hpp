#ifndef POLICY_DELTA_ONPOLICY_HPP
#define POLICY_DELTA_ONPOLICY_HPP

#include <span>
#include <vector>

#include "policy_delta/core_data.hpp"

namespace policy_delta {

enum class SampleLabel { kRaw, kAdjusted };

// Outcomes of one arm, either raw y_i or residuals y_i - f(x_i).
struct AdjustedSample {
  std::vector<double> values;
  SampleLabel label = SampleLabel::kRaw;
};

// Raw outcomes when `model` is null, residuals otherwise. The model must be
// action-agnostic.
AdjustedSample MakeSample(const Dataset& arm, const RewardModel* model = nullptr);

// Throws kEmptyInput on an empty span.
double SampleMean(std::span<const double> values);

// Sum of squared deviations over (n - dof_loss). dof_loss = 1 is Bessel's
// correction for one estimated mean. Throws kInsufficientData if
// n <= dof_loss.
double SampleVariance(std::span<const double> values, int dof_loss);

// mean(a) - mean(b) with variance s_a^2/n_a + s_b^2/n_b, each arm losing one
// degree of freedom. Needs at least two values per arm.
EstimateResult DifferenceInMeans(std::span<const double> a,
                                 std::span<const double> b,
                                 double ci_level = 0.95);

// Difference-in-means on the outcomes of two arms.
EstimateResult DimEstimate(const Dataset& treatment, const Dataset& control,
                           double ci_level = 0.95);

// Difference-in-means on residuals y - f(x). `model` is used as given; no
// implicit rescaling.
EstimateResult RadimEstimate(const Dataset& treatment, const Dataset& control,
                             const RewardModel& model, double ci_level = 0.95);

// OLS slope Cov(y, fx) / Var(fx): the factor theta for which theta * f leaves
// the smallest residual variance. Throws kZeroVariancePredictor.
double FitScalingCoefficient(std::span<const double> y,
                             std::span<const double> fx);

// Var(y - theta * fx) / Var(y) with theta from FitScalingCoefficient, which
// equals 1 - corr(y, fx)^2. Throws kZeroVarianceOutcome.
double ResidualVarianceRatio(std::span<const double> y,
                             std::span<const double> fx);

// Pearson correlation; both inputs need non-zero variance.
double Correlation(std::span<const double> y, std::span<const double> fx);

}  // namespace policy_delta

#endif  // POLICY_DELTA_ONPOLICY_HPP
