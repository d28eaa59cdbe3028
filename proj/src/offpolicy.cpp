#include "policy_delta/offpolicy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "policy_delta/summation.hpp"

namespace policy_delta {
namespace {

void RequireOpe(const Dataset& data) {
  if (data.framing() != Framing::kOPE) {
    throw Error(ErrorCode::kWrongFraming,
                "off-policy estimators need OPE-framed data; re-frame A/B "
                "data first");
  }
}

void RequireActionSet(const Dataset& data, const PolicyTable& policy) {
  if (policy.action_count() != data.action_count()) {
    throw Error(ErrorCode::kUnknownActionSet,
                "policy covers " + std::to_string(policy.action_count()) +
                    " actions, data has " +
                    std::to_string(data.action_count()));
  }
}

void RequireSize(std::size_t n, int dof_loss) {
  if (dof_loss < 1) {
    throw Error(ErrorCode::kInvalidConfig, "dof_loss must be >= 1");
  }
  if (n <= static_cast<std::size_t>(dof_loss)) {
    throw Error(ErrorCode::kInsufficientData,
                "need more than " + std::to_string(dof_loss) +
                    " records, got " + std::to_string(n));
  }
}

}  // namespace

double DeltaWeight(double target_prob, double alternative_prob,
                   double logging_propensity) {
  if (!(logging_propensity > 0.0) || !std::isfinite(logging_propensity)) {
    throw Error(ErrorCode::kZeroPropensity,
                "logging propensity must be positive");
  }
  return (target_prob - alternative_prob) / logging_propensity;
}

double DeltaWeight(const PolicyTable& target, const PolicyTable& alternative,
                   const LoggedRecord& record) {
  return DeltaWeight(target.Prob(record.context_id, record.action),
                     alternative.Prob(record.context_id, record.action),
                     record.logging_propensity);
}

std::vector<double> DeltaWeights(const Dataset& data, const PolicyTable& target,
                                 const PolicyTable& alternative,
                                 std::optional<double> max_abs_weight) {
  RequireOpe(data);
  RequireActionSet(data, target);
  RequireActionSet(data, alternative);
  std::vector<double> weights;
  weights.reserve(data.size());
  for (const auto& r : data.records()) {
    double w = DeltaWeight(target, alternative, r);
    if (max_abs_weight) w = std::clamp(w, -*max_abs_weight, *max_abs_weight);
    weights.push_back(w);
  }
  return weights;
}

EstimateResult EstimateFromTerms(std::span<const double> terms, int dof_loss,
                                 double ci_level) {
  RequireSize(terms.size(), dof_loss);
  const double n = static_cast<double>(terms.size());
  const double point = StableSum(terms) / n;
  const double variance = SumSquaredDeviations(terms, point) /
                          ((n - static_cast<double>(dof_loss)) * n);
  return MakeEstimate(point, variance, dof_loss, terms.size(), ci_level);
}

std::vector<double> BaselineAdjustedTerms(const Dataset& data,
                                          std::span<const double> weights,
                                          double beta) {
  const auto& records = data.records();
  std::vector<double> terms(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    terms[i] = weights[i] * (records[i].reward - beta);
  }
  return terms;
}

double DeltaDrCorrection(const LoggedRecord& record, const PolicyTable& target,
                         const PolicyTable& alternative,
                         const RewardModel& model, int action_count) {
  // sum_a (pi - pi') f(x) = f(x) (1 - 1)
  if (model.action_agnostic()) return 0.0;
  CompensatedSum correction;
  for (int a = 0; a < action_count; ++a) {
    const double diff = target.Prob(record.context_id, a) -
                        alternative.Prob(record.context_id, a);
    if (diff != 0.0) correction.Add(diff * model.Predict(record, a));
  }
  return correction.Total();
}

std::vector<double> DeltaDrTerms(const Dataset& data, const PolicyTable& target,
                                 const PolicyTable& alternative,
                                 const RewardModel& model,
                                 std::span<const double> weights) {
  const auto& records = data.records();
  std::vector<double> terms(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    terms[i] = weights[i] * (r.reward - model.Predict(r, r.action)) +
               DeltaDrCorrection(r, target, alternative, model,
                                 data.action_count());
  }
  return terms;
}

EstimateResult DeltaIpsEstimate(const Dataset& data, const PolicyTable& target,
                                const PolicyTable& alternative,
                                double ci_level) {
  const auto weights = DeltaWeights(data, target, alternative);
  return EstimateFromTerms(BaselineAdjustedTerms(data, weights, 0.0), 1,
                           ci_level);
}

double EstimateBetaStar(const Dataset& data, const PolicyTable& target,
                        const PolicyTable& alternative) {
  return EstimateBetaStar(data, DeltaWeights(data, target, alternative));
}

double EstimateBetaStar(const Dataset& data, std::span<const double> weights) {
  if (weights.size() != data.size()) {
    throw Error(ErrorCode::kInvalidConfig, "one weight per record is required");
  }
  CompensatedSum weighted_outcome, squared_weight;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w2 = weights[i] * weights[i];
    weighted_outcome.Add(w2 * data.records()[i].reward);
    squared_weight.Add(w2);
  }
  if (squared_weight.Total() == 0.0) {
    throw Error(ErrorCode::kDegenerateWeights,
                "every importance weight is zero");
  }
  return weighted_outcome.Total() / squared_weight.Total();
}

EstimateResult DeltaBetaIpsEstimate(const Dataset& data,
                                    const PolicyTable& target,
                                    const PolicyTable& alternative, double beta,
                                    int dof_loss, double ci_level) {
  RequireSize(data.size(), dof_loss);
  const auto weights = DeltaWeights(data, target, alternative);
  return EstimateFromTerms(BaselineAdjustedTerms(data, weights, beta),
                           dof_loss, ci_level);
}

std::vector<double> DrTerms(const Dataset& data, const PolicyTable& target,
                            const RewardModel& model,
                            std::optional<double> max_abs_weight) {
  RequireOpe(data);
  RequireActionSet(data, target);
  std::vector<double> terms;
  terms.reserve(data.size());
  for (const auto& r : data.records()) {
    double w = DeltaWeight(target.Prob(r.context_id, r.action), 0.0,
                           r.logging_propensity);
    if (max_abs_weight) w = std::clamp(w, -*max_abs_weight, *max_abs_weight);
    CompensatedSum direct;
    for (int a = 0; a < data.action_count(); ++a) {
      direct.Add(target.Prob(r.context_id, a) * model.Predict(r, a));
    }
    terms.push_back(w * (r.reward - model.Predict(r, r.action)) +
                    direct.Total());
  }
  return terms;
}

EstimateResult DrEstimate(const Dataset& data, const PolicyTable& target,
                          const RewardModel& model, double ci_level) {
  return EstimateFromTerms(DrTerms(data, target, model), 1, ci_level);
}

EstimateResult DeltaDrEstimate(const Dataset& data, const PolicyTable& target,
                               const PolicyTable& alternative,
                               const RewardModel& model, int dof_loss,
                               double ci_level) {
  RequireSize(data.size(), dof_loss);
  const auto weights = DeltaWeights(data, target, alternative);
  return EstimateFromTerms(
      DeltaDrTerms(data, target, alternative, model, weights), dof_loss,
      ci_level);
}

double BesselFactor(std::size_t n) {
  if (n < 3) {
    throw Error(ErrorCode::kInsufficientData,
                "Bessel factor (n-1)/(n-2) needs n >= 3");
  }
  return static_cast<double>(n - 1) / static_cast<double>(n - 2);
}

}  // namespace policy_delta
