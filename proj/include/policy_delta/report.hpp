#ifndef POLICY_DELTA_REPORT_HPP
#define POLICY_DELTA_REPORT_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "policy_delta/core_data.hpp"
#include "policy_delta/equivalence.hpp"

namespace policy_delta {

struct NamedResult {
  std::string name;
  std::variant<EstimateResult, EquivalenceReport> result;

  bool operator==(const NamedResult&) const = default;
};

// Machine-readable output of one CLI command.
struct RunReport {
  std::string command;
  nlohmann::json config_echo = nlohmann::json::object();
  std::vector<NamedResult> results;
  std::int64_t timing_ms = 0;
  // Set when weight clipping was applied.
  bool biased = false;
  std::vector<std::string> warnings;

  bool operator==(const RunReport&) const = default;
};

// Non-finite doubles are written as null and read back as +infinity.
void to_json(nlohmann::json& j, const EstimateResult& r);
void from_json(const nlohmann::json& j, EstimateResult& r);

// Flat object: nested estimates appear as onpolicy_* and offpolicy_* keys.
void to_json(nlohmann::json& j, const EquivalenceReport& r);
void from_json(const nlohmann::json& j, EquivalenceReport& r);

void to_json(nlohmann::json& j, const NamedResult& r);
void from_json(const nlohmann::json& j, NamedResult& r);

void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

}  // namespace policy_delta

#endif  // POLICY_DELTA_REPORT_HPP
