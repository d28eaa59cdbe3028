#ifndef POLICY_DELTA_OFFPOLICY_HPP
#define POLICY_DELTA_OFFPOLICY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "policy_delta/core_data.hpp"

namespace policy_delta {

// (pi(a|x) - pi'(a|x)) / pi_0(a|x). Throws kZeroPropensity unless
// logging_propensity > 0.
double DeltaWeight(double target_prob, double alternative_prob,
                   double logging_propensity);

// Same, looked up for a logged record.
double DeltaWeight(const PolicyTable& target, const PolicyTable& alternative,
                   const LoggedRecord& record);

// One weight per record, in record order. With `max_abs_weight` set, weights
// are clipped to [-max, max]; clipping biases every estimator below.
std::vector<double> DeltaWeights(const Dataset& data, const PolicyTable& target,
                                 const PolicyTable& alternative,
                                 std::optional<double> max_abs_weight = {});

// Mean of per-sample terms z_i with variance of the mean
// sum (z_i - mean)^2 / ((n - dof_loss) * n).
EstimateResult EstimateFromTerms(std::span<const double> terms, int dof_loss,
                                 double ci_level = 0.95);

// z_i = w_i * (y_i - beta).
std::vector<double> BaselineAdjustedTerms(const Dataset& data,
                                          std::span<const double> weights,
                                          double beta);

// Per-record Delta-DR terms
// w_i * (y_i - f(x_i, a_i)) + sum_a (pi(a|x_i) - pi'(a|x_i)) f(x_i, a).
std::vector<double> DeltaDrTerms(const Dataset& data, const PolicyTable& target,
                                 const PolicyTable& alternative,
                                 const RewardModel& model,
                                 std::span<const double> weights);

// sum_a (pi(a|x) - pi'(a|x)) f(x, a). Zero by construction, without
// summation, when the model is action-agnostic.
double DeltaDrCorrection(const LoggedRecord& record, const PolicyTable& target,
                         const PolicyTable& alternative,
                         const RewardModel& model, int action_count);

// Mean of w_i * y_i with dof_loss = 1.
EstimateResult DeltaIpsEstimate(const Dataset& data, const PolicyTable& target,
                                const PolicyTable& alternative,
                                double ci_level = 0.95);

// Plug-in variance-minimising baseline sum w_i^2 y_i / sum w_i^2.
// Throws kDegenerateWeights when every weight is zero.
double EstimateBetaStar(const Dataset& data, const PolicyTable& target,
                        const PolicyTable& alternative);

// Same ratio over precomputed (possibly clipped) weights.
double EstimateBetaStar(const Dataset& data, std::span<const double> weights);

// Mean of w_i * (y_i - beta). Use dof_loss = 2 when beta was estimated from
// the same data.
EstimateResult DeltaBetaIpsEstimate(const Dataset& data,
                                    const PolicyTable& target,
                                    const PolicyTable& alternative, double beta,
                                    int dof_loss, double ci_level = 0.95);

// Per-record single-policy DR terms
// (pi(a_i|x_i) / pi_0_i) (y_i - f(x_i, a_i)) + sum_a pi(a|x_i) f(x_i, a),
// with the ratio optionally clipped to max_abs_weight.
std::vector<double> DrTerms(const Dataset& data, const PolicyTable& target,
                            const RewardModel& model,
                            std::optional<double> max_abs_weight = {});

// Doubly robust value of a single policy.
EstimateResult DrEstimate(const Dataset& data, const PolicyTable& target,
                          const RewardModel& model, double ci_level = 0.95);

// Doubly robust value difference.
EstimateResult DeltaDrEstimate(const Dataset& data, const PolicyTable& target,
                               const PolicyTable& alternative,
                               const RewardModel& model, int dof_loss = 1,
                               double ci_level = 0.95);

// (n - 1) / (n - 2). Throws kInsufficientData for n < 3.
double BesselFactor(std::size_t n);

}  // namespace policy_delta

#endif  // POLICY_DELTA_OFFPOLICY_HPP
