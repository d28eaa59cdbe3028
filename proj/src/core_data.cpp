#include "policy_delta/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "policy_delta/summation.hpp"

namespace policy_delta {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kNonFinitePropensity: return "NonFinitePropensity";
    case ErrorCode::kNonFiniteReward: return "NonFiniteReward";
    case ErrorCode::kUnknownArmLabel: return "UnknownArmLabel";
    case ErrorCode::kActionOutOfRange: return "ActionOutOfRange";
    case ErrorCode::kWrongFraming: return "WrongFraming";
    case ErrorCode::kEmptyArm: return "EmptyArm";
    case ErrorCode::kNonFiniteExpectedReward: return "NonFiniteExpectedReward";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kActionAwareModelRejected: return "ActionAwareModelRejected";
    case ErrorCode::kZeroVariancePredictor: return "ZeroVariancePredictor";
    case ErrorCode::kZeroVarianceOutcome: return "ZeroVarianceOutcome";
    case ErrorCode::kZeroPropensity: return "ZeroPropensity";
    case ErrorCode::kDegenerateWeights: return "DegenerateWeights";
    case ErrorCode::kUnknownActionSet: return "UnknownActionSet";
    case ErrorCode::kInvalidPolicy: return "InvalidPolicy";
    case ErrorCode::kInvalidAllocation: return "InvalidAllocation";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::string_view FramingName(Framing framing) {
  return framing == Framing::kAB ? "AB" : "OPE";
}

namespace {

void CheckRecord(const LoggedRecord& r) {
  if (!std::isfinite(r.logging_propensity) || r.logging_propensity <= 0.0 ||
      r.logging_propensity > 1.0) {
    std::ostringstream msg;
    msg << "record " << r.row << " has propensity " << r.logging_propensity
        << ", outside (0, 1]";
    throw Error(ErrorCode::kNonFinitePropensity, msg.str());
  }
  if (!std::isfinite(r.reward)) {
    throw Error(ErrorCode::kNonFiniteReward,
                "record " + std::to_string(r.row) + " has a non-finite reward");
  }
}

ArmLabels InferArmLabels(const std::vector<LoggedRecord>& records) {
  std::vector<std::string> seen;
  for (const auto& r : records) {
    if (!r.arm) {
      throw Error(ErrorCode::kUnknownArmLabel,
                  "record " + std::to_string(r.row) + " has no arm label");
    }
    if (std::find(seen.begin(), seen.end(), *r.arm) == seen.end()) {
      seen.push_back(*r.arm);
    }
  }
  const auto has = [&](const char* label) {
    return std::find(seen.begin(), seen.end(), label) != seen.end();
  };
  if (seen.size() <= 2 && std::all_of(seen.begin(), seen.end(), [](auto& s) {
        return s == "T" || s == "C";
      })) {
    return {"T", "C"};
  }
  if (seen.size() == 2 && !has("T") && !has("C")) return {seen[0], seen[1]};
  throw Error(ErrorCode::kUnknownArmLabel,
              "cannot infer two arm labels from " +
                  std::to_string(seen.size()) +
                  " distinct labels; pass them explicitly");
}

void CheckAll(const std::vector<LoggedRecord>& records, Framing framing,
              int action_count, const std::optional<ArmLabels>& labels) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "dataset has no records");
  }
  for (const auto& r : records) {
    CheckRecord(r);
    if (framing == Framing::kOPE) {
      if (r.action < 0 || r.action >= action_count) {
        throw Error(ErrorCode::kActionOutOfRange,
                    "record " + std::to_string(r.row) + " has action " +
                        std::to_string(r.action) + " but action_count is " +
                        std::to_string(action_count));
      }
      continue;
    }
    if (!r.arm || (*r.arm != labels->treatment && *r.arm != labels->control)) {
      throw Error(ErrorCode::kUnknownArmLabel,
                  "record " + std::to_string(r.row) + " has arm '" +
                      r.arm.value_or("") + "', expected '" +
                      labels->treatment + "' or '" + labels->control + "'");
    }
    const int arm_index = *r.arm == labels->treatment ? 0 : 1;
    if (r.action != arm_index) {
      throw Error(ErrorCode::kActionOutOfRange,
                  "record " + std::to_string(r.row) + " in arm '" + *r.arm +
                      "' must carry action " + std::to_string(arm_index));
    }
  }
}

}  // namespace

const ArmLabels& Dataset::arm_labels() const {
  if (framing_ != Framing::kAB) {
    throw Error(ErrorCode::kWrongFraming, "arm labels exist only for AB data");
  }
  return *arm_labels_;
}

bool Dataset::IsTreatment(const LoggedRecord& record) const {
  return record.arm == arm_labels().treatment;
}

Dataset ValidateDataset(std::vector<LoggedRecord> raw_records, Framing framing,
                        const DatasetOptions& options) {
  for (std::size_t i = 0; i < raw_records.size(); ++i) raw_records[i].row = i;
  if (raw_records.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "dataset has no records");
  }

  int action_count = 2;
  std::optional<ArmLabels> labels;
  if (framing == Framing::kOPE) {
    if (options.action_count) {
      action_count = *options.action_count;
    } else {
      int max_action = 0;
      for (const auto& r : raw_records) max_action = std::max(max_action, r.action);
      action_count = max_action + 1;
    }
    if (action_count < 1) {
      throw Error(ErrorCode::kActionOutOfRange, "action_count must be >= 1");
    }
  } else {
    labels = options.arm_labels ? *options.arm_labels
                                : InferArmLabels(raw_records);
    if (labels->treatment == labels->control) {
      throw Error(ErrorCode::kUnknownArmLabel, "arm labels must differ");
    }
  }
  CheckAll(raw_records, framing, action_count, labels);
  return Dataset(std::move(raw_records), framing, action_count,
                 std::move(labels));
}

Dataset RebuildDataset(std::vector<LoggedRecord> records, Framing framing,
                       int action_count, std::optional<ArmLabels> arm_labels) {
  if (framing == Framing::kAB && !arm_labels) {
    throw Error(ErrorCode::kUnknownArmLabel, "AB data needs arm labels");
  }
  CheckAll(records, framing, action_count, arm_labels);
  return Dataset(std::move(records), framing, action_count,
                 std::move(arm_labels));
}

std::pair<Dataset, Dataset> SplitByArm(const Dataset& dataset) {
  if (dataset.framing() != Framing::kAB) {
    throw Error(ErrorCode::kWrongFraming, "split_by_arm requires AB data");
  }
  std::vector<LoggedRecord> treatment;
  std::vector<LoggedRecord> control;
  for (const auto& r : dataset.records()) {
    (dataset.IsTreatment(r) ? treatment : control).push_back(r);
  }
  const ArmLabels& labels = dataset.arm_labels();
  if (treatment.empty() || control.empty()) {
    throw Error(ErrorCode::kEmptyArm,
                "arm '" + (treatment.empty() ? labels.treatment
                                             : labels.control) +
                    "' has no records");
  }
  return {Dataset(std::move(treatment), Framing::kAB, 2, labels),
          Dataset(std::move(control), Framing::kAB, 2, labels)};
}

// ---------------------------------------------------------------------------
// PolicyTable

PolicyTable::PolicyTable(std::vector<std::vector<double>> probabilities)
    : rows_(std::move(probabilities)) {
  if (rows_.empty() || rows_.front().empty()) {
    throw Error(ErrorCode::kInvalidPolicy, "policy table is empty");
  }
  action_count_ = static_cast<int>(rows_.front().size());
  Validate();
}

PolicyTable PolicyTable::Broadcast(std::vector<double> distribution) {
  PolicyTable table({std::move(distribution)});
  table.broadcast_ = true;
  return table;
}

PolicyTable PolicyTable::PointMass(int action, int action_count) {
  if (action < 0 || action >= action_count) {
    throw Error(ErrorCode::kUnknownActionSet, "point mass outside action set");
  }
  std::vector<double> row(static_cast<std::size_t>(action_count), 0.0);
  row[static_cast<std::size_t>(action)] = 1.0;
  return Broadcast(std::move(row));
}

PolicyTable PolicyTable::Uniform(int action_count) {
  if (action_count < 1) {
    throw Error(ErrorCode::kUnknownActionSet, "action_count must be >= 1");
  }
  return Broadcast(std::vector<double>(static_cast<std::size_t>(action_count),
                                       1.0 / action_count));
}

PolicyTable PolicyTable::Mixture(double alpha, const PolicyTable& a,
                                 const PolicyTable& b) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidPolicy, "mixture weight outside [0, 1]");
  }
  if (a.action_count_ != b.action_count_) {
    throw Error(ErrorCode::kUnknownActionSet, "mixed policies differ in actions");
  }
  const bool broadcast = a.broadcast_ && b.broadcast_;
  const std::size_t contexts =
      broadcast ? 1 : std::max(a.rows_.size(), b.rows_.size());
  std::vector<std::vector<double>> rows(contexts);
  for (std::size_t x = 0; x < contexts; ++x) {
    const auto ra = a.Row(static_cast<std::int64_t>(x));
    const auto rb = b.Row(static_cast<std::int64_t>(x));
    rows[x].resize(ra.size());
    for (std::size_t k = 0; k < ra.size(); ++k) {
      rows[x][k] = alpha * ra[k] + (1.0 - alpha) * rb[k];
    }
  }
  PolicyTable table(std::move(rows));
  table.broadcast_ = broadcast;
  return table;
}

void PolicyTable::Validate() const {
  for (std::size_t x = 0; x < rows_.size(); ++x) {
    const auto& row = rows_[x];
    if (static_cast<int>(row.size()) != action_count_) {
      throw Error(ErrorCode::kInvalidPolicy,
                  "row " + std::to_string(x) + " has " +
                      std::to_string(row.size()) + " actions, expected " +
                      std::to_string(action_count_));
    }
    CompensatedSum total;
    for (double p : row) {
      if (!std::isfinite(p) || p < 0.0) {
        throw Error(ErrorCode::kInvalidPolicy,
                    "row " + std::to_string(x) + " has a negative or "
                    "non-finite probability");
      }
      total.Add(p);
    }
    if (std::abs(total.Total() - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row " << x << " sums to " << total.Total();
      throw Error(ErrorCode::kInvalidPolicy, msg.str());
    }
  }
}

std::span<const double> PolicyTable::Row(std::int64_t context_id) const {
  if (broadcast_) return rows_.front();
  if (context_id < 0 || static_cast<std::size_t>(context_id) >= rows_.size()) {
    throw Error(ErrorCode::kInvalidPolicy,
                "context " + std::to_string(context_id) +
                    " is not covered by a policy with " +
                    std::to_string(rows_.size()) + " rows");
  }
  return rows_[static_cast<std::size_t>(context_id)];
}

double PolicyTable::Prob(std::int64_t context_id, int action) const {
  const auto row = Row(context_id);
  if (action < 0 || action >= action_count_) {
    throw Error(ErrorCode::kUnknownActionSet,
                "action " + std::to_string(action) + " outside a policy over " +
                    std::to_string(action_count_) + " actions");
  }
  return row[static_cast<std::size_t>(action)];
}

// ---------------------------------------------------------------------------
// RewardModel

RewardModel RewardModel::Agnostic(AgnosticFn fn) {
  return RewardModel(ModelKind::kActionAgnostic, std::move(fn), nullptr);
}

RewardModel RewardModel::Aware(AwareFn fn) {
  return RewardModel(ModelKind::kActionAware, nullptr, std::move(fn));
}

RewardModel RewardModel::Constant(double value) {
  return Agnostic([value](const LoggedRecord&) { return value; });
}

RewardModel RewardModel::Linear(double intercept,
                                std::vector<double> coefficients) {
  return Agnostic([intercept, coefficients = std::move(coefficients)](
                      const LoggedRecord& r) {
    if (r.covariates.size() != coefficients.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "linear model has " + std::to_string(coefficients.size()) +
                      " coefficients but record " + std::to_string(r.row) +
                      " has " + std::to_string(r.covariates.size()) +
                      " covariates");
    }
    double value = intercept;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
      value += coefficients[k] * r.covariates[k];
    }
    return value;
  });
}

RewardModel RewardModel::PerRecord(std::vector<double> values) {
  return Agnostic([values = std::move(values)](const LoggedRecord& r) {
    if (r.row >= values.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "no prediction for record " + std::to_string(r.row));
    }
    return values[r.row];
  });
}

RewardModel RewardModel::ContextTable(std::vector<double> values) {
  return Agnostic([values = std::move(values)](const LoggedRecord& r) {
    if (r.context_id < 0 ||
        static_cast<std::size_t>(r.context_id) >= values.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "no prediction for context " + std::to_string(r.context_id));
    }
    return values[static_cast<std::size_t>(r.context_id)];
  });
}

RewardModel RewardModel::ActionTable(std::vector<std::vector<double>> values) {
  return Aware([values = std::move(values)](const LoggedRecord& r, int action) {
    if (r.context_id < 0 ||
        static_cast<std::size_t>(r.context_id) >= values.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "no prediction for context " + std::to_string(r.context_id));
    }
    const auto& row = values[static_cast<std::size_t>(r.context_id)];
    if (action < 0 || static_cast<std::size_t>(action) >= row.size()) {
      throw Error(ErrorCode::kUnknownActionSet,
                  "no prediction for action " + std::to_string(action));
    }
    return row[static_cast<std::size_t>(action)];
  });
}

double RewardModel::Predict(const LoggedRecord& record) const {
  if (kind_ != ModelKind::kActionAgnostic) {
    throw Error(ErrorCode::kActionAwareModelRejected,
                "an action-agnostic model f(x) is required");
  }
  return agnostic_(record);
}

double RewardModel::Predict(const LoggedRecord& record, int action) const {
  if (kind_ == ModelKind::kActionAgnostic) return agnostic_(record);
  return aware_(record, action);
}

RewardModel RewardModel::Shifted(double offset) const {
  if (kind_ == ModelKind::kActionAgnostic) {
    return Agnostic([base = agnostic_, offset](const LoggedRecord& r) {
      return base(r) + offset;
    });
  }
  return Aware([base = aware_, offset](const LoggedRecord& r, int a) {
    return base(r, a) + offset;
  });
}

RewardModel RewardModel::Scaled(double factor) const {
  if (kind_ == ModelKind::kActionAgnostic) {
    return Agnostic([base = agnostic_, factor](const LoggedRecord& r) {
      return factor * base(r);
    });
  }
  return Aware([base = aware_, factor](const LoggedRecord& r, int a) {
    return factor * base(r, a);
  });
}

// ---------------------------------------------------------------------------
// Estimates and oracle

double NormalCriticalValue(double ci_level) {
  if (!(ci_level > 0.0 && ci_level < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "ci level must lie in (0, 1)");
  }
  const boost::math::normal standard;
  return boost::math::quantile(standard, 0.5 + ci_level / 2.0);
}

EstimateResult MakeEstimate(double point, double variance_of_mean,
                            int dof_loss, std::size_t n_used, double ci_level) {
  EstimateResult out;
  out.point = point;
  out.variance_of_mean = variance_of_mean;
  out.std_error = std::sqrt(variance_of_mean);
  out.dof_loss = dof_loss;
  out.ci_level = ci_level;
  out.n_used = n_used;
  const double half_width = NormalCriticalValue(ci_level) * out.std_error;
  out.ci_low = point - half_width;
  out.ci_high = point + half_width;
  return out;
}

double TruePolicyValue(const PolicyTable& policy,
                       std::span<const double> context_probabilities,
                       const std::vector<std::vector<double>>& expected_reward) {
  if (context_probabilities.size() != expected_reward.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "context distribution and reward table disagree in size");
  }
  CompensatedSum mass;
  for (double p : context_probabilities) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInvalidConfig, "invalid context probability");
    }
    mass.Add(p);
  }
  if (std::abs(mass.Total() - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidConfig, "context probabilities must sum to 1");
  }

  CompensatedSum value;
  for (std::size_t x = 0; x < expected_reward.size(); ++x) {
    const auto row = policy.Row(static_cast<std::int64_t>(x));
    if (row.size() != expected_reward[x].size()) {
      throw Error(ErrorCode::kUnknownActionSet,
                  "policy and reward table disagree on the action set");
    }
    for (std::size_t a = 0; a < row.size(); ++a) {
      const double mean_reward = expected_reward[x][a];
      if (!std::isfinite(mean_reward)) {
        throw Error(ErrorCode::kNonFiniteExpectedReward,
                    "E[Y|x=" + std::to_string(x) + ",a=" + std::to_string(a) +
                        "] is not finite");
      }
      value.Add(context_probabilities[x] * row[a] * mean_reward);
    }
  }
  return value.Total();
}

}  // namespace policy_delta
