#ifndef POLICY_DELTA_CORE_DATA_HPP
#define POLICY_DELTA_CORE_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "policy_delta/errors.hpp"

namespace policy_delta {

enum class Framing { kAB, kOPE };

std::string_view FramingName(Framing framing);

// One logged interaction (x_i, a_i, y_i, pi_0(a_i|x_i)).
struct LoggedRecord {
  std::int64_t context_id = 0;
  std::vector<double> covariates;
  int action = 0;
  double reward = 0.0;
  double logging_propensity = 1.0;
  // Deployed arm, for A/B-framed data.
  std::optional<std::string> arm;
  // Position in the collection the dataset was validated from. Survives
  // splitting and re-framing, and keys per-record model predictions.
  std::size_t row = 0;
};

// First label is the treatment arm (action 0), second the control (action 1).
struct ArmLabels {
  std::string treatment;
  std::string control;

  bool operator==(const ArmLabels&) const = default;
};

struct DatasetOptions {
  // OPE framing: inferred as max(action) + 1 when absent.
  std::optional<int> action_count;
  // AB framing: when absent, {"T", "C"} if those are the labels present,
  // otherwise order of first appearance.
  std::optional<ArmLabels> arm_labels;
};

// Validated, immutable collection of logged records.
class Dataset {
 public:
  const std::vector<LoggedRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  Framing framing() const { return framing_; }
  int action_count() const { return action_count_; }
  // Throws kWrongFraming for OPE-framed data.
  const ArmLabels& arm_labels() const;

  // AB framing only.
  bool IsTreatment(const LoggedRecord& record) const;

 private:
  friend Dataset ValidateDataset(std::vector<LoggedRecord>, Framing,
                                 const DatasetOptions&);
  friend std::pair<Dataset, Dataset> SplitByArm(const Dataset&);
  friend Dataset RebuildDataset(std::vector<LoggedRecord>, Framing, int,
                                std::optional<ArmLabels>);

  Dataset(std::vector<LoggedRecord> records, Framing framing, int action_count,
          std::optional<ArmLabels> arm_labels)
      : records_(std::move(records)),
        framing_(framing),
        action_count_(action_count),
        arm_labels_(std::move(arm_labels)) {}

  std::vector<LoggedRecord> records_;
  Framing framing_;
  int action_count_;
  std::optional<ArmLabels> arm_labels_;
};

// Checks every record and dataset-level invariant and assigns `row`.
// Errors: kEmptyDataset, kNonFinitePropensity, kNonFiniteReward,
// kUnknownArmLabel, kActionOutOfRange.
Dataset ValidateDataset(std::vector<LoggedRecord> raw_records, Framing framing,
                        const DatasetOptions& options = {});

// Re-validates records that already carry their `row`. Used when deriving
// one dataset from another (e.g. re-framing an A/B test as OPE data).
Dataset RebuildDataset(std::vector<LoggedRecord> records, Framing framing,
                       int action_count, std::optional<ArmLabels> arm_labels);

// Partition of an AB dataset into (treatment, control), order preserved.
std::pair<Dataset, Dataset> SplitByArm(const Dataset& dataset);

// Conditional action distribution pi(a|x) over a finite action set.
class PolicyTable {
 public:
  // Rows indexed by context id. Throws kInvalidPolicy unless every entry is
  // non-negative and every row sums to 1 within 1e-12.
  explicit PolicyTable(std::vector<std::vector<double>> probabilities);

  // Same distribution for every context id.
  static PolicyTable Broadcast(std::vector<double> distribution);
  static PolicyTable PointMass(int action, int action_count);
  static PolicyTable Uniform(int action_count);
  // alpha * a + (1 - alpha) * b, row by row.
  static PolicyTable Mixture(double alpha, const PolicyTable& a,
                             const PolicyTable& b);

  double Prob(std::int64_t context_id, int action) const;
  std::span<const double> Row(std::int64_t context_id) const;

  int action_count() const { return action_count_; }
  std::size_t context_count() const { return rows_.size(); }
  bool broadcast() const { return broadcast_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }

 private:
  PolicyTable() = default;
  void Validate() const;

  std::vector<std::vector<double>> rows_;
  int action_count_ = 0;
  bool broadcast_ = false;
};

enum class ModelKind { kActionAgnostic, kActionAware };

// Outcome predictor f(x) or f(x, a).
class RewardModel {
 public:
  using AgnosticFn = std::function<double(const LoggedRecord&)>;
  using AwareFn = std::function<double(const LoggedRecord&, int)>;

  static RewardModel Agnostic(AgnosticFn fn);
  static RewardModel Aware(AwareFn fn);

  static RewardModel Constant(double value);
  // intercept + <coefficients, covariates>
  static RewardModel Linear(double intercept, std::vector<double> coefficients);
  // values[record.row]
  static RewardModel PerRecord(std::vector<double> values);
  // values[record.context_id]
  static RewardModel ContextTable(std::vector<double> values);
  // values[record.context_id][action]
  static RewardModel ActionTable(std::vector<std::vector<double>> values);

  ModelKind kind() const { return kind_; }
  bool action_agnostic() const { return kind_ == ModelKind::kActionAgnostic; }

  // f(x). Throws kActionAwareModelRejected for action-aware models.
  double Predict(const LoggedRecord& record) const;
  // f(x, a). Action-agnostic models ignore `action`.
  double Predict(const LoggedRecord& record, int action) const;

  RewardModel Shifted(double offset) const;
  RewardModel Scaled(double factor) const;

 private:
  RewardModel(ModelKind kind, AgnosticFn agnostic, AwareFn aware)
      : kind_(kind), agnostic_(std::move(agnostic)), aware_(std::move(aware)) {}

  ModelKind kind_;
  AgnosticFn agnostic_;
  AwareFn aware_;
};

struct EstimateResult {
  double point = 0.0;
  double variance_of_mean = 0.0;
  double std_error = 0.0;
  int dof_loss = 1;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double ci_level = 0.95;
  std::size_t n_used = 0;

  bool operator==(const EstimateResult&) const = default;
};

// Two-sided standard normal quantile for a central interval at `ci_level`.
double NormalCriticalValue(double ci_level);

// Fills std_error and a normal-approximation interval around `point`.
EstimateResult MakeEstimate(double point, double variance_of_mean,
                            int dof_loss, std::size_t n_used, double ci_level);

// V(pi) = sum_x P(x) sum_a pi(a|x) E[Y|x,a], by exhaustive enumeration.
// Throws kNonFiniteExpectedReward on non-finite table entries.
double TruePolicyValue(const PolicyTable& policy,
                       std::span<const double> context_probabilities,
                       const std::vector<std::vector<double>>& expected_reward);

}  // namespace policy_delta

#endif  // POLICY_DELTA_CORE_DATA_HPP
