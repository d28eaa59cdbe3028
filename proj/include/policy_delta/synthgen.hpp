#ifndef POLICY_DELTA_SYNTHGEN_HPP
#define POLICY_DELTA_SYNTHGEN_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "policy_delta/core_data.hpp"
#include "policy_delta/equivalence.hpp"

namespace policy_delta {

struct SyntheticConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  Framing framing = Framing::kAB;

  // AB framing.
  double p = 0.5;
  double ate = 0.0;
  double rho = 0.0;

  // OPE framing. Contexts are drawn uniformly.
  int context_count = 2;
  int action_count = 2;
  double logging_temperature = 1.0;
  std::vector<std::vector<double>> reward_table;
  // Explicit logging policy; softmax(reward_table / temperature) otherwise.
  std::optional<std::vector<std::vector<double>>> logging_table;
  // Multiplicity denominator for ExhaustiveDataset; searched when absent.
  std::optional<int> resolution;
  double noise_sd = 0.0;

  bool operator==(const SyntheticConfig&) const = default;
};

// Throws kInvalidConfig naming the offending field.
void ValidateConfig(const SyntheticConfig& config);

// Generator for replication `stream` of a study seeded with `seed`. Distinct
// streams are seeded independently through std::seed_seq.
std::mt19937_64 MakeStream(std::uint64_t seed, std::uint64_t stream = 0);

// Unit covariate u ~ N(0, 1), treatment with probability p, and
//   y = rho * u + ate * T + e,  e ~ N(0, 1 - rho^2),
// so Var(y) = 1 within each arm and corr(y, u) = rho. The returned model is
// the oracle f(x) = rho * u.
std::pair<ABExperiment, RewardModel> GenAbExperiment(
    const SyntheticConfig& config);

// Same draw using an explicit generator, for replication studies.
std::pair<ABExperiment, RewardModel> GenAbExperiment(
    const SyntheticConfig& config, std::mt19937_64& rng);

PolicyTable LoggingPolicy(const SyntheticConfig& config);

// Contextual bandit logs under LoggingPolicy(config). Covariates are the
// one-hot context indicator.
std::pair<Dataset, PolicyTable> GenBanditLogs(const SyntheticConfig& config);

// Every (x, a) pair with integer multiplicity proportional to
// P(x) pi_0(a|x), so sample averages equal population expectations.
// Requires noise_sd == 0 and propensities that are multiples of
// 1/resolution.
Dataset ExhaustiveDataset(const SyntheticConfig& config);

// Exact V(pi) for an OPE config (uniform contexts).
double TruePolicyValue(const PolicyTable& policy, const SyntheticConfig& config);

}  // namespace policy_delta

#endif  // POLICY_DELTA_SYNTHGEN_HPP
