#ifndef POLICY_DELTA_SWEEP_HPP
#define POLICY_DELTA_SWEEP_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "policy_delta/equivalence.hpp"
#include "policy_delta/synthgen.hpp"

namespace policy_delta {

// Estimators compared in Monte Carlo studies of A/B experiments.
enum class StudyEstimator { kDim, kRadim, kDeltaBetaStarIps, kDeltaDr };

inline constexpr std::array<StudyEstimator, 4> kStudyEstimators = {
    StudyEstimator::kDim, StudyEstimator::kRadim,
    StudyEstimator::kDeltaBetaStarIps, StudyEstimator::kDeltaDr};

std::string_view StudyEstimatorName(StudyEstimator estimator);

// All four estimates on one generated experiment. The off-policy pair uses
// `mode` propensities, beta* from the closed form, and dof_loss = 2; the
// regression-adjusted pair uses the generator's oracle model, centred at
// beta* on the off-policy side.
std::array<EstimateResult, 4> EstimateReplication(const ABExperiment& experiment,
                                                  const RewardModel& model,
                                                  PropensityMode mode,
                                                  double ci_level);

struct EstimatorSummary {
  double mean_point = 0.0;
  double bias = 0.0;
  // Absent with a single replication.
  std::optional<double> empirical_variance;
  double mean_estimated_variance = 0.0;
  double coverage_pct = 0.0;
};

struct StudyResult {
  SyntheticConfig config;
  std::size_t replications = 0;
  std::array<EstimatorSummary, 4> estimators;
};

// Replication r of a study draws from MakeStream(config.seed, first_stream
// + r). Work is spread over `threads` workers; results do not depend on the
// thread count.
StudyResult RunStudy(const SyntheticConfig& config, std::size_t replications,
                     PropensityMode mode, double ci_level = 0.95,
                     unsigned threads = 1, std::uint64_t first_stream = 0);

enum class SweepParameter { kP, kRho, kN };

struct SweepAxis {
  SweepParameter parameter = SweepParameter::kRho;
  std::vector<double> values;
};

// Parses "rho=0,0.5,0.8". Throws kParseError.
SweepAxis ParseSweepAxis(std::string_view text);

// Grid over one or two axes (row-major, first axis outermost).
std::vector<StudyResult> RunSweep(const SyntheticConfig& base,
                                  const std::vector<SweepAxis>& axes,
                                  std::size_t replications, PropensityMode mode,
                                  double ci_level = 0.95, unsigned threads = 1);

// One row per grid point; variance columns are left empty and the row
// flagged when there is a single replication.
void WriteSweepCsv(std::ostream& out, const std::vector<StudyResult>& rows);

// POLICY_DELTA_THREADS if set and positive, otherwise the hardware count.
unsigned SweepThreadsFromEnvironment();

}  // namespace policy_delta

#endif  // POLICY_DELTA_SWEEP_HPP
