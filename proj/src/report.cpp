#include "policy_delta/report.hpp"

#include <cmath>
#include <limits>

namespace policy_delta {

using nlohmann::json;

namespace {

json Number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double ReadNumber(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

PropensityMode ModeFromName(const std::string& name) {
  if (name == "nominal") return PropensityMode::kNominal;
  if (name == "empirical") return PropensityMode::kEmpirical;
  throw Error(ErrorCode::kParseError, "unknown propensity mode '" + name + "'");
}

Verdict VerdictFromName(const std::string& name) {
  if (name == "ExactMatch") return Verdict::kExactMatch;
  if (name == "ApproxMatch") return Verdict::kApproxMatch;
  if (name == "Mismatch") return Verdict::kMismatch;
  throw Error(ErrorCode::kParseError, "unknown verdict '" + name + "'");
}

void FlattenInto(json& out, const std::string& prefix, const EstimateResult& r) {
  const json flat = r;
  for (const auto& [key, value] : flat.items()) out[prefix + key] = value;
}

EstimateResult Unflatten(const json& j, const std::string& prefix) {
  json nested = json::object();
  for (const char* key : {"point", "variance_of_mean", "stderr", "dof_loss",
                          "ci_low", "ci_high", "ci_level", "n_used"}) {
    nested[key] = j.at(prefix + key);
  }
  return nested.get<EstimateResult>();
}

}  // namespace

void to_json(json& j, const EstimateResult& r) {
  j = json{{"point", Number(r.point)},
           {"variance_of_mean", Number(r.variance_of_mean)},
           {"stderr", Number(r.std_error)},
           {"dof_loss", r.dof_loss},
           {"ci_low", Number(r.ci_low)},
           {"ci_high", Number(r.ci_high)},
           {"ci_level", r.ci_level},
           {"n_used", r.n_used}};
}

void from_json(const json& j, EstimateResult& r) {
  r.point = ReadNumber(j, "point");
  r.variance_of_mean = ReadNumber(j, "variance_of_mean");
  r.std_error = ReadNumber(j, "stderr");
  r.dof_loss = j.at("dof_loss").get<int>();
  r.ci_low = ReadNumber(j, "ci_low");
  r.ci_high = ReadNumber(j, "ci_high");
  r.ci_level = j.at("ci_level").get<double>();
  r.n_used = j.at("n_used").get<std::size_t>();
}

void to_json(json& j, const EquivalenceReport& r) {
  j = json{{"comparison", r.comparison},
           {"point_abs_diff", Number(r.point_abs_diff)},
           {"variance_rel_diff", Number(r.variance_rel_diff)},
           {"variance_ratio", Number(r.variance_ratio)},
           {"propensity_mode", std::string(PropensityModeName(r.propensity_mode))},
           {"dof_loss_used", r.dof_loss_used},
           {"allocation", r.allocation},
           {"n_treatment", r.n_treatment},
           {"n_control", r.n_control},
           {"beta_star", Number(r.beta_star)},
           {"beta_star_plugin", Number(r.beta_star_plugin)},
           {"verdict", std::string(VerdictName(r.verdict))}};
  FlattenInto(j, "onpolicy_", r.onpolicy);
  FlattenInto(j, "offpolicy_", r.offpolicy);
}

void from_json(const json& j, EquivalenceReport& r) {
  r.comparison = j.at("comparison").get<std::string>();
  r.point_abs_diff = ReadNumber(j, "point_abs_diff");
  r.variance_rel_diff = ReadNumber(j, "variance_rel_diff");
  r.variance_ratio = ReadNumber(j, "variance_ratio");
  r.propensity_mode = ModeFromName(j.at("propensity_mode").get<std::string>());
  r.dof_loss_used = j.at("dof_loss_used").get<int>();
  r.allocation = j.at("allocation").get<double>();
  r.n_treatment = j.at("n_treatment").get<std::size_t>();
  r.n_control = j.at("n_control").get<std::size_t>();
  r.beta_star = ReadNumber(j, "beta_star");
  r.beta_star_plugin = ReadNumber(j, "beta_star_plugin");
  r.verdict = VerdictFromName(j.at("verdict").get<std::string>());
  r.onpolicy = Unflatten(j, "onpolicy_");
  r.offpolicy = Unflatten(j, "offpolicy_");
}

void to_json(json& j, const NamedResult& r) {
  if (const auto* estimate = std::get_if<EstimateResult>(&r.result)) {
    j = *estimate;
    j["type"] = "estimate";
  } else {
    j = std::get<EquivalenceReport>(r.result);
    j["type"] = "equivalence";
  }
  j["name"] = r.name;
}

void from_json(const json& j, NamedResult& r) {
  r.name = j.at("name").get<std::string>();
  const std::string type = j.at("type").get<std::string>();
  if (type == "estimate") {
    r.result = j.get<EstimateResult>();
  } else if (type == "equivalence") {
    r.result = j.get<EquivalenceReport>();
  } else {
    throw Error(ErrorCode::kParseError, "unknown result type '" + type + "'");
  }
}

void to_json(json& j, const RunReport& r) {
  j = json{{"command", r.command},
           {"config_echo", r.config_echo},
           {"results", r.results},
           {"timing_ms", r.timing_ms},
           {"biased", r.biased},
           {"warnings", r.warnings}};
}

void from_json(const json& j, RunReport& r) {
  r.command = j.at("command").get<std::string>();
  r.config_echo = j.at("config_echo");
  r.results = j.at("results").get<std::vector<NamedResult>>();
  r.timing_ms = j.at("timing_ms").get<std::int64_t>();
  r.biased = j.value("biased", false);
  r.warnings = j.value("warnings", std::vector<std::string>{});
}

}  // namespace policy_delta
