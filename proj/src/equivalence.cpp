#include "policy_delta/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "policy_delta/offpolicy.hpp"
#include "policy_delta/onpolicy.hpp"
#include "policy_delta/summation.hpp"

namespace policy_delta {
namespace {

void RequireAllocation(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInvalidAllocation,
                "allocation probability must lie in (0, 1), got " +
                    std::to_string(p));
  }
}

void RequireArmSizes(const ABExperiment& experiment) {
  if (experiment.treatment_count() < 2 || experiment.control_count() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "equivalence checks need at least two records per arm");
  }
}

double RelativeDifference(double reference, double value) {
  if (reference == 0.0) {
    return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(value - reference) / std::abs(reference);
}

EquivalenceReport Compare(std::string comparison, const ABExperiment& experiment,
                          PropensityMode mode, int dof_loss,
                          const EstimateResult& onpolicy,
                          const EstimateResult& offpolicy) {
  EquivalenceReport report;
  report.comparison = std::move(comparison);
  report.onpolicy = onpolicy;
  report.offpolicy = offpolicy;
  report.point_abs_diff = std::abs(offpolicy.point - onpolicy.point);
  report.variance_rel_diff =
      RelativeDifference(onpolicy.variance_of_mean, offpolicy.variance_of_mean);
  report.variance_ratio =
      offpolicy.variance_of_mean == 0.0
          ? (onpolicy.variance_of_mean == 0.0
                 ? 1.0
                 : std::numeric_limits<double>::infinity())
          : onpolicy.variance_of_mean / offpolicy.variance_of_mean;
  report.propensity_mode = mode;
  report.dof_loss_used = dof_loss;
  report.allocation = experiment.allocation(mode);
  report.n_treatment = experiment.treatment_count();
  report.n_control = experiment.control_count();
  report.verdict = ClassifyAgreement(onpolicy, report.point_abs_diff,
                                     report.variance_rel_diff);
  return report;
}

}  // namespace

std::string_view PropensityModeName(PropensityMode mode) {
  return mode == PropensityMode::kNominal ? "nominal" : "empirical";
}

std::string_view VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kExactMatch: return "ExactMatch";
    case Verdict::kApproxMatch: return "ApproxMatch";
    case Verdict::kMismatch: return "Mismatch";
  }
  return "Mismatch";
}

ABExperiment::ABExperiment(Dataset data, double nominal_p)
    : data_(std::move(data)), nominal_p_(nominal_p) {
  RequireAllocation(nominal_p_);
  // Throws kWrongFraming / kEmptyArm.
  const auto arms = SplitByArm(data_);
  treatment_count_ = arms.first.size();
}

double ABExperiment::empirical_p() const {
  return static_cast<double>(treatment_count_) /
         static_cast<double>(data_.size());
}

double ABExperiment::allocation(PropensityMode mode) const {
  return mode == PropensityMode::kNominal ? nominal_p_ : empirical_p();
}

double AbWeight(bool treatment, double p) {
  RequireAllocation(p);
  return treatment ? 1.0 / p : -1.0 / (1.0 - p);
}

Dataset AbToOpe(const ABExperiment& experiment, PropensityMode mode) {
  const double p = experiment.allocation(mode);
  RequireAllocation(p);
  const Dataset& source = experiment.data();
  std::vector<LoggedRecord> records = source.records();
  for (auto& r : records) {
    const bool treated = source.IsTreatment(r);
    r.action = treated ? 0 : 1;
    r.logging_propensity = treated ? p : 1.0 - p;
  }
  return RebuildDataset(std::move(records), Framing::kOPE, 2, std::nullopt);
}

PolicyTable TreatmentPolicy() { return PolicyTable::PointMass(0, 2); }
PolicyTable ControlPolicy() { return PolicyTable::PointMass(1, 2); }

double BetaStarAb(double mu_t, double mu_c, double p) {
  RequireAllocation(p);
  return (1.0 - p) * mu_t + p * mu_c;
}

RewardModel CenterRewardModel(const RewardModel& model, const Dataset& data,
                              double target) {
  if (!model.action_agnostic()) {
    throw Error(ErrorCode::kActionAwareModelRejected,
                "only action-agnostic models can be centred");
  }
  CompensatedSum total;
  for (const auto& r : data.records()) total.Add(model.Predict(r));
  const double mean = total.Total() / static_cast<double>(data.size());
  return model.Shifted(target - mean);
}

Verdict ClassifyAgreement(const EstimateResult& onpolicy,
                          double point_abs_diff, double variance_rel_diff) {
  if (point_abs_diff < kExactMatchTolerance &&
      variance_rel_diff < kExactMatchTolerance) {
    return Verdict::kExactMatch;
  }
  const double scale = std::max(std::abs(onpolicy.point), onpolicy.std_error);
  const bool point_agrees =
      point_abs_diff < kExactMatchTolerance ||
      (scale > 0.0 && point_abs_diff / scale < kApproxMatchTolerance);
  if (point_agrees && variance_rel_diff < kApproxMatchTolerance) {
    return Verdict::kApproxMatch;
  }
  return Verdict::kMismatch;
}

EquivalenceReport VerifyDimEquivalence(const ABExperiment& experiment,
                                       PropensityMode mode, int dof_loss) {
  RequireArmSizes(experiment);
  const auto [treatment, control] = SplitByArm(experiment.data());
  const EstimateResult onpolicy = DimEstimate(treatment, control);

  const Dataset logged = AbToOpe(experiment, mode);
  const double beta = BetaStarAb(SampleMean(MakeSample(treatment).values),
                                 SampleMean(MakeSample(control).values),
                                 experiment.allocation(mode));
  const EstimateResult offpolicy = DeltaBetaIpsEstimate(
      logged, TreatmentPolicy(), ControlPolicy(), beta, dof_loss);

  EquivalenceReport report =
      Compare("dim", experiment, mode, dof_loss, onpolicy, offpolicy);
  report.beta_star = beta;
  report.beta_star_plugin =
      EstimateBetaStar(logged, TreatmentPolicy(), ControlPolicy());
  return report;
}

EquivalenceReport VerifyRadimDrEquivalence(const ABExperiment& experiment,
                                           const RewardModel& model,
                                           PropensityMode mode, int dof_loss) {
  if (!model.action_agnostic()) {
    throw Error(ErrorCode::kActionAwareModelRejected,
                "RADiM equivalence needs an action-agnostic model");
  }
  RequireArmSizes(experiment);
  const auto [treatment, control] = SplitByArm(experiment.data());
  const EstimateResult onpolicy = RadimEstimate(treatment, control, model);

  const Dataset logged = AbToOpe(experiment, mode);
  const double beta = BetaStarAb(SampleMean(MakeSample(treatment).values),
                                 SampleMean(MakeSample(control).values),
                                 experiment.allocation(mode));
  const RewardModel centred = CenterRewardModel(model, logged, beta);
  const EstimateResult offpolicy = DeltaDrEstimate(
      logged, TreatmentPolicy(), ControlPolicy(), centred, dof_loss);

  EquivalenceReport report =
      Compare("radim", experiment, mode, dof_loss, onpolicy, offpolicy);
  report.beta_star = beta;
  report.beta_star_plugin =
      EstimateBetaStar(logged, TreatmentPolicy(), ControlPolicy());
  return report;
}

}  // namespace policy_delta
