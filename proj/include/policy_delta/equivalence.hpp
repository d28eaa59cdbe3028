#ifndef POLICY_DELTA_EQUIVALENCE_HPP
#define POLICY_DELTA_EQUIVALENCE_HPP

#include <cstddef>
#include <string>
#include <string_view>

#include "policy_delta/core_data.hpp"

namespace policy_delta {

// Treating the A/B assignment itself as the logged action: treatment is
// action 0, control action 1, and the two compared policies are the point
// masses on those actions.
//
// Two allocation conventions are supported. Nominal uses the designed
// treatment probability p; Empirical uses the realised fraction n_T / N. The
// finite-sample identities between on- and off-policy estimates hold exactly
// only with Empirical propensities.
enum class PropensityMode { kNominal, kEmpirical };

std::string_view PropensityModeName(PropensityMode mode);

inline constexpr double kExactMatchTolerance = 1e-10;
inline constexpr double kApproxMatchTolerance = 1e-2;

class ABExperiment {
 public:
  // Throws kWrongFraming, kEmptyArm, or kInvalidAllocation.
  ABExperiment(Dataset data, double nominal_p);

  const Dataset& data() const { return data_; }
  double nominal_p() const { return nominal_p_; }
  std::size_t treatment_count() const { return treatment_count_; }
  std::size_t control_count() const { return data_.size() - treatment_count_; }
  double empirical_p() const;
  double allocation(PropensityMode mode) const;
  bool balanced() const { return 2 * treatment_count_ == data_.size(); }

 private:
  Dataset data_;
  double nominal_p_;
  std::size_t treatment_count_ = 0;
};

// 1/p for the treatment arm, -1/(1-p) for control.
double AbWeight(bool treatment, double p);

// Relabels an experiment as two-action OPE data. Propensities are p for
// treated units and 1 - p for controls, with p chosen by `mode`.
Dataset AbToOpe(const ABExperiment& experiment, PropensityMode mode);

PolicyTable TreatmentPolicy();
PolicyTable ControlPolicy();

// (1 - p) mu_t + p mu_c
double BetaStarAb(double mu_t, double mu_c, double p);

// f'(x) = f(x) + target - mean_d f. Throws kActionAwareModelRejected.
RewardModel CenterRewardModel(const RewardModel& model, const Dataset& data,
                              double target);

enum class Verdict { kExactMatch, kApproxMatch, kMismatch };

std::string_view VerdictName(Verdict verdict);

struct EquivalenceReport {
  std::string comparison;  // "dim" or "radim"
  EstimateResult onpolicy;
  EstimateResult offpolicy;
  double point_abs_diff = 0.0;
  // |off - on| / on
  double variance_rel_diff = 0.0;
  // on / off
  double variance_ratio = 1.0;
  PropensityMode propensity_mode = PropensityMode::kEmpirical;
  int dof_loss_used = 2;
  double allocation = 0.5;
  std::size_t n_treatment = 0;
  std::size_t n_control = 0;
  // Closed-form baseline, and the generic plug-in estimate on the same
  // weights. They coincide in Empirical mode.
  double beta_star = 0.0;
  double beta_star_plugin = 0.0;
  Verdict verdict = Verdict::kMismatch;

  bool operator==(const EquivalenceReport&) const = default;
};

// ExactMatch when both discrepancies are under kExactMatchTolerance.
// ApproxMatch when the point agrees (exactly, or within
// kApproxMatchTolerance relative to max(|point|, stderr)) and the variance
// is within kApproxMatchTolerance relative.
Verdict ClassifyAgreement(const EstimateResult& onpolicy,
                          double point_abs_diff, double variance_rel_diff);

// DiM against Delta-beta*-IPS on the re-framed experiment.
EquivalenceReport VerifyDimEquivalence(const ABExperiment& experiment,
                                       PropensityMode mode, int dof_loss);

// RADiM with `model` against Delta-DR with `model` centred at beta*.
EquivalenceReport VerifyRadimDrEquivalence(const ABExperiment& experiment,
                                           const RewardModel& model,
                                           PropensityMode mode, int dof_loss);

}  // namespace policy_delta

#endif  // POLICY_DELTA_EQUIVALENCE_HPP
