#include "policy_delta/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>

#include "policy_delta/offpolicy.hpp"
#include "policy_delta/onpolicy.hpp"
#include "policy_delta/summation.hpp"

namespace policy_delta {
namespace {

std::string Cell(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.10g", v);
  return buffer;
}

SyntheticConfig Apply(SyntheticConfig config, SweepParameter parameter,
                      double value) {
  switch (parameter) {
    case SweepParameter::kP: config.p = value; break;
    case SweepParameter::kRho: config.rho = value; break;
    case SweepParameter::kN:
      if (!(value >= 2.0) || std::floor(value) != value) {
        throw Error(ErrorCode::kInvalidConfig, "sweep value for n must be an "
                                               "integer >= 2");
      }
      config.n = static_cast<std::size_t>(value);
      break;
  }
  return config;
}

}  // namespace

std::string_view StudyEstimatorName(StudyEstimator estimator) {
  switch (estimator) {
    case StudyEstimator::kDim: return "dim";
    case StudyEstimator::kRadim: return "radim";
    case StudyEstimator::kDeltaBetaStarIps: return "dbips";
    case StudyEstimator::kDeltaDr: return "ddr";
  }
  return "unknown";
}

std::array<EstimateResult, 4> EstimateReplication(const ABExperiment& experiment,
                                                  const RewardModel& model,
                                                  PropensityMode mode,
                                                  double ci_level) {
  const auto [treatment, control] = SplitByArm(experiment.data());
  const auto raw_t = MakeSample(treatment).values;
  const auto raw_c = MakeSample(control).values;
  const auto adj_t = MakeSample(treatment, &model).values;
  const auto adj_c = MakeSample(control, &model).values;

  const Dataset logged = AbToOpe(experiment, mode);
  const double beta = BetaStarAb(SampleMean(raw_t), SampleMean(raw_c),
                                 experiment.allocation(mode));
  const PolicyTable target = TreatmentPolicy();
  const PolicyTable alternative = ControlPolicy();
  const RewardModel centred = CenterRewardModel(model, logged, beta);

  return {DifferenceInMeans(raw_t, raw_c, ci_level),
          DifferenceInMeans(adj_t, adj_c, ci_level),
          DeltaBetaIpsEstimate(logged, target, alternative, beta, 2, ci_level),
          DeltaDrEstimate(logged, target, alternative, centred, 2, ci_level)};
}

StudyResult RunStudy(const SyntheticConfig& config, std::size_t replications,
                     PropensityMode mode, double ci_level, unsigned threads,
                     std::uint64_t first_stream) {
  if (replications < 1) {
    throw Error(ErrorCode::kInvalidConfig, "replications must be >= 1");
  }
  ValidateConfig(config);
  std::vector<std::array<EstimateResult, 4>> outcomes(replications);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr failure;
  const auto worker = [&] {
    for (std::size_t r = next++; r < replications && !failed; r = next++) {
      try {
        auto rng = MakeStream(config.seed, first_stream + r);
        const auto [experiment, model] = GenAbExperiment(config, rng);
        outcomes[r] = EstimateReplication(experiment, model, mode, ci_level);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(
                             threads, static_cast<unsigned>(replications)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  StudyResult study;
  study.config = config;
  study.replications = replications;
  const double r_count = static_cast<double>(replications);
  for (std::size_t k = 0; k < kStudyEstimators.size(); ++k) {
    std::vector<double> points(replications);
    CompensatedSum estimated_variance;
    std::size_t covered = 0;
    for (std::size_t r = 0; r < replications; ++r) {
      const EstimateResult& e = outcomes[r][k];
      points[r] = e.point;
      estimated_variance.Add(e.variance_of_mean);
      if (e.ci_low <= config.ate && config.ate <= e.ci_high) ++covered;
    }
    EstimatorSummary& s = study.estimators[k];
    s.mean_point = SampleMean(points);
    s.bias = s.mean_point - config.ate;
    if (replications >= 2) s.empirical_variance = SampleVariance(points, 1);
    s.mean_estimated_variance = estimated_variance.Total() / r_count;
    s.coverage_pct = 100.0 * static_cast<double>(covered) / r_count;
  }
  return study;
}

SweepAxis ParseSweepAxis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::kParseError,
                "sweep axis must look like 'rho=0,0.5,0.8'");
  }
  const std::string name(text.substr(0, eq));
  SweepAxis axis;
  if (name == "p") {
    axis.parameter = SweepParameter::kP;
  } else if (name == "rho") {
    axis.parameter = SweepParameter::kRho;
  } else if (name == "n") {
    axis.parameter = SweepParameter::kN;
  } else {
    throw Error(ErrorCode::kParseError,
                "sweep parameter '" + name + "' is not one of p, rho, n");
  }
  std::istringstream values{std::string(text.substr(eq + 1))};
  std::string item;
  while (std::getline(values, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) {
      throw Error(ErrorCode::kParseError,
                  "sweep value '" + item + "' for '" + name +
                      "' is not a number");
    }
    axis.values.push_back(v);
  }
  if (axis.values.empty()) {
    throw Error(ErrorCode::kParseError, "sweep axis '" + name + "' is empty");
  }
  return axis;
}

std::vector<StudyResult> RunSweep(const SyntheticConfig& base,
                                  const std::vector<SweepAxis>& axes,
                                  std::size_t replications, PropensityMode mode,
                                  double ci_level, unsigned threads) {
  if (axes.empty() || axes.size() > 2) {
    throw Error(ErrorCode::kInvalidConfig, "sweep over one or two parameters");
  }
  if (base.framing != Framing::kAB) {
    throw Error(ErrorCode::kInvalidConfig, "sweeps need an AB config");
  }
  std::vector<SyntheticConfig> grid;
  for (double v0 : axes[0].values) {
    const SyntheticConfig outer = Apply(base, axes[0].parameter, v0);
    if (axes.size() == 1) {
      grid.push_back(outer);
      continue;
    }
    for (double v1 : axes[1].values) {
      grid.push_back(Apply(outer, axes[1].parameter, v1));
    }
  }
  std::vector<StudyResult> rows;
  rows.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    rows.push_back(RunStudy(grid[g], replications, mode, ci_level, threads,
                            static_cast<std::uint64_t>(g) * replications));
  }
  return rows;
}

void WriteSweepCsv(std::ostream& out, const std::vector<StudyResult>& rows) {
  out << "p,rho,n,ate,replications,flag";
  for (StudyEstimator e : kStudyEstimators) {
    const std::string name(StudyEstimatorName(e));
    out << ',' << name << "_mean_point," << name << "_bias," << name
        << "_empirical_variance," << name << "_mean_estimated_variance,"
        << name << "_coverage_pct";
  }
  out << '\n';
  for (const auto& row : rows) {
    out << Cell(row.config.p) << ',' << Cell(row.config.rho) << ','
        << row.config.n << ',' << Cell(row.config.ate) << ','
        << row.replications << ','
        << (row.replications < 2 ? "single_replication" : "");
    for (const auto& s : row.estimators) {
      out << ',' << Cell(s.mean_point) << ',' << Cell(s.bias) << ','
          << (s.empirical_variance ? Cell(*s.empirical_variance) : "") << ','
          << Cell(s.mean_estimated_variance) << ',' << Cell(s.coverage_pct);
    }
    out << '\n';
  }
}

unsigned SweepThreadsFromEnvironment() {
  if (const char* env = std::getenv("POLICY_DELTA_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace policy_delta
