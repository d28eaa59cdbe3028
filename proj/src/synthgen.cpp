#include "policy_delta/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace policy_delta {
namespace {

constexpr int kMaxResolution = 100000;
constexpr double kMultiplicityTolerance = 1e-9;

[[noreturn]] void Invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidConfig, "'" + field + "' " + why);
}

void CheckTable(const std::vector<std::vector<double>>& table,
                const std::string& field, int rows, int cols) {
  if (static_cast<int>(table.size()) != rows) {
    Invalid(field, "must have " + std::to_string(rows) + " rows");
  }
  for (const auto& row : table) {
    if (static_cast<int>(row.size()) != cols) {
      Invalid(field, "must have " + std::to_string(cols) + " columns");
    }
    for (double v : row) {
      if (!std::isfinite(v)) Invalid(field, "has a non-finite entry");
    }
  }
}

std::vector<double> UniformContexts(int count) {
  return std::vector<double>(static_cast<std::size_t>(count), 1.0 / count);
}

}  // namespace

void ValidateConfig(const SyntheticConfig& c) {
  if (!std::isfinite(c.noise_sd) || c.noise_sd < 0.0) {
    Invalid("noise_sd", "must be finite and >= 0");
  }
  if (c.framing == Framing::kAB) {
    if (c.n < 2) Invalid("n", "must be >= 2");
    if (!(c.p > 0.0 && c.p < 1.0)) Invalid("p", "must lie in (0, 1)");
    if (!(c.rho >= 0.0 && c.rho < 1.0)) Invalid("rho", "must lie in [0, 1)");
    if (!std::isfinite(c.ate)) Invalid("ate", "must be finite");
    return;
  }
  if (c.context_count < 1) Invalid("context_count", "must be >= 1");
  if (c.action_count < 1) Invalid("action_count", "must be >= 1");
  if (!(c.logging_temperature > 0.0)) {
    Invalid("logging_temperature", "must be > 0");
  }
  CheckTable(c.reward_table, "reward_table", c.context_count, c.action_count);
  if (c.logging_table) {
    CheckTable(*c.logging_table, "logging_table", c.context_count,
               c.action_count);
  }
  if (c.resolution && *c.resolution < 1) Invalid("resolution", "must be >= 1");
}

std::mt19937_64 MakeStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::pair<ABExperiment, RewardModel> GenAbExperiment(
    const SyntheticConfig& config) {
  auto rng = MakeStream(config.seed);
  return GenAbExperiment(config, rng);
}

std::pair<ABExperiment, RewardModel> GenAbExperiment(
    const SyntheticConfig& config, std::mt19937_64& rng) {
  if (config.framing != Framing::kAB) {
    Invalid("framing", "must be AB for an A/B experiment");
  }
  ValidateConfig(config);
  const double slope = config.rho;
  const double noise_sd = std::sqrt(1.0 - config.rho * config.rho);

  std::normal_distribution<double> gaussian(0.0, 1.0);
  std::bernoulli_distribution assign(config.p);
  std::vector<LoggedRecord> records(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const double u = gaussian(rng);
    const bool treated = assign(rng);
    const double noise = gaussian(rng);
    LoggedRecord& r = records[i];
    r.context_id = static_cast<std::int64_t>(i);
    r.covariates = {u};
    r.action = treated ? 0 : 1;
    r.reward = slope * u + (treated ? config.ate : 0.0) + noise_sd * noise;
    r.logging_propensity = treated ? config.p : 1.0 - config.p;
    r.arm = treated ? "T" : "C";
  }
  DatasetOptions options;
  options.arm_labels = ArmLabels{"T", "C"};
  Dataset data = ValidateDataset(std::move(records), Framing::kAB, options);
  return {ABExperiment(std::move(data), config.p),
          RewardModel::Linear(0.0, {slope})};
}

PolicyTable LoggingPolicy(const SyntheticConfig& config) {
  ValidateConfig(config);
  if (config.logging_table) return PolicyTable(*config.logging_table);
  std::vector<std::vector<double>> rows;
  rows.reserve(config.reward_table.size());
  for (const auto& rewards : config.reward_table) {
    const double top = *std::max_element(rewards.begin(), rewards.end());
    std::vector<double> row(rewards.size());
    double total = 0.0;
    for (std::size_t a = 0; a < rewards.size(); ++a) {
      row[a] = std::exp((rewards[a] - top) / config.logging_temperature);
      total += row[a];
    }
    for (double& v : row) v /= total;
    rows.push_back(std::move(row));
  }
  return PolicyTable(std::move(rows));
}

std::pair<Dataset, PolicyTable> GenBanditLogs(const SyntheticConfig& config) {
  if (config.framing != Framing::kOPE) {
    Invalid("framing", "must be OPE for bandit logs");
  }
  PolicyTable logging = LoggingPolicy(config);
  if (config.n < 1) Invalid("n", "must be >= 1");

  auto rng = MakeStream(config.seed);
  std::uniform_int_distribution<int> context_draw(0, config.context_count - 1);
  std::normal_distribution<double> gaussian(0.0, 1.0);
  std::vector<std::discrete_distribution<int>> action_draws;
  for (const auto& row : logging.rows()) {
    action_draws.emplace_back(row.begin(), row.end());
  }

  std::vector<LoggedRecord> records(config.n);
  for (auto& r : records) {
    const int x = context_draw(rng);
    const int a = action_draws[static_cast<std::size_t>(x)](rng);
    r.context_id = x;
    r.covariates.assign(static_cast<std::size_t>(config.context_count), 0.0);
    r.covariates[static_cast<std::size_t>(x)] = 1.0;
    r.action = a;
    r.reward = config.reward_table[static_cast<std::size_t>(x)]
                                  [static_cast<std::size_t>(a)];
    if (config.noise_sd > 0.0) r.reward += config.noise_sd * gaussian(rng);
    r.logging_propensity = logging.Prob(x, a);
  }
  DatasetOptions options;
  options.action_count = config.action_count;
  return {ValidateDataset(std::move(records), Framing::kOPE, options),
          std::move(logging)};
}

Dataset ExhaustiveDataset(const SyntheticConfig& config) {
  if (config.framing != Framing::kOPE) {
    Invalid("framing", "must be OPE for an exhaustive dataset");
  }
  if (config.noise_sd != 0.0) Invalid("noise_sd", "must be 0 for enumeration");
  const PolicyTable logging = LoggingPolicy(config);

  const auto representable = [&](int resolution) {
    for (const auto& row : logging.rows()) {
      for (double p : row) {
        const double scaled = p * resolution;
        if (std::abs(scaled - std::round(scaled)) > kMultiplicityTolerance) {
          return false;
        }
      }
    }
    return true;
  };

  int resolution = 0;
  if (config.resolution) {
    if (!representable(*config.resolution)) {
      Invalid("resolution", "does not make every propensity an integer "
                            "multiple of 1/" +
                                std::to_string(*config.resolution));
    }
    resolution = *config.resolution;
  } else {
    for (int d = 1; d <= kMaxResolution && resolution == 0; ++d) {
      if (representable(d)) resolution = d;
    }
    if (resolution == 0) {
      Invalid("logging_table",
              "propensities are not rational with denominator <= " +
                  std::to_string(kMaxResolution));
    }
  }

  std::vector<LoggedRecord> records;
  for (int x = 0; x < config.context_count; ++x) {
    for (int a = 0; a < config.action_count; ++a) {
      const double p = logging.Prob(x, a);
      const auto multiplicity = static_cast<int>(std::lround(p * resolution));
      for (int k = 0; k < multiplicity; ++k) {
        LoggedRecord r;
        r.context_id = x;
        r.covariates.assign(static_cast<std::size_t>(config.context_count),
                            0.0);
        r.covariates[static_cast<std::size_t>(x)] = 1.0;
        r.action = a;
        r.reward = config.reward_table[static_cast<std::size_t>(x)]
                                      [static_cast<std::size_t>(a)];
        r.logging_propensity = p;
        records.push_back(std::move(r));
      }
    }
  }
  DatasetOptions options;
  options.action_count = config.action_count;
  return ValidateDataset(std::move(records), Framing::kOPE, options);
}

double TruePolicyValue(const PolicyTable& policy, const SyntheticConfig& config) {
  if (config.context_count < 1) Invalid("context_count", "must be >= 1");
  return TruePolicyValue(policy, UniformContexts(config.context_count),
                         config.reward_table);
}

}  // namespace policy_delta
