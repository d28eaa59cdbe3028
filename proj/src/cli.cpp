#include "policy_delta/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "policy_delta/equivalence.hpp"
#include "policy_delta/io.hpp"
#include "policy_delta/offpolicy.hpp"
#include "policy_delta/onpolicy.hpp"
#include "policy_delta/report.hpp"
#include "policy_delta/sweep.hpp"
#include "policy_delta/synthgen.hpp"

namespace policy_delta {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ElapsedMs(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               start)
      .count();
}

PropensityMode ParseMode(const std::string& name) {
  return name == "nominal" ? PropensityMode::kNominal
                           : PropensityMode::kEmpirical;
}

std::optional<ArmLabels> ParseArms(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw Error(ErrorCode::kParseError,
                "--arms expects 'treatment,control', got '" + text + "'");
  }
  return ArmLabels{text.substr(0, comma), text.substr(comma + 1)};
}

struct DataOptions {
  std::string path;
  std::string arms;
  int action_count = 0;
};

// AB framing when every record names an arm, OPE otherwise.
Dataset LoadDataset(const DataOptions& options) {
  auto records = ReadRecords(options.path);
  const bool ab = !records.empty() &&
                  std::all_of(records.begin(), records.end(),
                              [](const LoggedRecord& r) { return r.arm.has_value(); });
  DatasetOptions dataset_options;
  if (ab) {
    dataset_options.arm_labels = ParseArms(options.arms);
  } else if (options.action_count > 0) {
    dataset_options.action_count = options.action_count;
  }
  return ValidateDataset(std::move(records), ab ? Framing::kAB : Framing::kOPE,
                         dataset_options);
}

// Designed allocation: --p when given, else the propensity logged on the
// first treated record.
double NominalAllocation(const Dataset& data, double override_p) {
  if (override_p > 0.0) return override_p;
  for (const auto& r : data.records()) {
    if (data.IsTreatment(r)) return r.logging_propensity;
  }
  throw Error(ErrorCode::kEmptyArm, "treatment arm has no records");
}

void PrintJson(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool exhaustive = false;
};

int Simulate(const SimulateArgs& args, std::ostream& out) {
  SyntheticConfig config = ReadConfig(args.config);
  if (args.seed) config.seed = *args.seed;
  json summary = {{"command", "simulate"},
                  {"out", args.out},
                  {"framing", std::string(FramingName(config.framing))}};
  if (config.framing == Framing::kAB) {
    const auto [experiment, model] = GenAbExperiment(config);
    WriteDataset(args.out, experiment.data());
    summary["n"] = experiment.data().size();
    summary["nominal_p"] = experiment.nominal_p();
    summary["realised_p"] = experiment.empirical_p();
  } else {
    const Dataset data = args.exhaustive ? ExhaustiveDataset(config)
                                         : GenBanditLogs(config).first;
    WriteDataset(args.out, data);
    summary["n"] = data.size();
    summary["action_count"] = data.action_count();
    summary["context_count"] = config.context_count;
    summary["exhaustive"] = args.exhaustive;
  }
  PrintJson(out, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  DataOptions data;
  std::string estimator;
  std::string policy;
  std::string policy_prime;
  std::string model;
  std::string beta = "auto";
  int dof_loss = 0;
  std::string mode = "empirical";
  double ci = 0.95;
  double p = 0.0;
  bool as_ope = false;
  std::optional<double> max_weight;
};

int Estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  RunReport report;
  report.command = "estimate";
  report.config_echo = {{"data", args.data.path},
                        {"estimator", args.estimator},
                        {"ci", args.ci}};

  Dataset data = LoadDataset(args.data);
  report.config_echo["framing"] = std::string(FramingName(data.framing()));
  const auto model = [&] {
    if (args.model.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "--model is required for estimator '" + args.estimator + "'");
    }
    return ReadRewardModel(args.model);
  };

  EstimateResult result;
  if (args.estimator == "dim" || args.estimator == "radim") {
    if (data.framing() != Framing::kAB) {
      throw Error(ErrorCode::kWrongFraming,
                  args.estimator + " needs A/B data with arm labels");
    }
    if (args.max_weight) {
      report.warnings.push_back("--max-weight ignored for on-policy estimators");
    }
    const auto [treatment, control] = SplitByArm(data);
    result = args.estimator == "dim"
                 ? DimEstimate(treatment, control, args.ci)
                 : RadimEstimate(treatment, control, model(), args.ci);
  } else {
    std::optional<PolicyTable> target;
    std::optional<PolicyTable> alternative;
    if (data.framing() == Framing::kAB) {
      if (!args.as_ope) {
        throw Error(ErrorCode::kWrongFraming,
                    "estimator '" + args.estimator +
                        "' needs OPE data; pass --as-ope to re-frame A/B data");
      }
      const ABExperiment experiment(data, NominalAllocation(data, args.p));
      const PropensityMode mode = ParseMode(args.mode);
      data = AbToOpe(experiment, mode);
      target = TreatmentPolicy();
      alternative = ControlPolicy();
      report.config_echo["as_ope"] = true;
      report.config_echo["mode"] = args.mode;
      report.config_echo["allocation"] = experiment.allocation(mode);
    }
    if (!args.policy.empty()) target = ReadPolicy(args.policy);
    if (!args.policy_prime.empty()) alternative = ReadPolicy(args.policy_prime);
    if (!target) {
      throw Error(ErrorCode::kInvalidConfig, "--policy is required");
    }
    if (args.max_weight) {
      report.biased = true;
      report.warnings.push_back(
          "importance weights clipped to +/-" + std::to_string(*args.max_weight) +
          "; the estimate is biased");
      err << "warning: weight clipping biases the estimate\n";
      report.config_echo["max_weight"] = *args.max_weight;
    }

    if (args.estimator == "dr") {
      const int dof = args.dof_loss > 0 ? args.dof_loss : 1;
      result = EstimateFromTerms(DrTerms(data, *target, model(), args.max_weight),
                                 dof, args.ci);
    } else {
      if (!alternative) {
        throw Error(ErrorCode::kInvalidConfig, "--policy-prime is required");
      }
      const auto weights =
          DeltaWeights(data, *target, *alternative, args.max_weight);
      if (args.estimator == "dips") {
        const int dof = args.dof_loss > 0 ? args.dof_loss : 1;
        result = EstimateFromTerms(BaselineAdjustedTerms(data, weights, 0.0),
                                   dof, args.ci);
      } else if (args.estimator == "dbips") {
        const bool automatic = args.beta == "auto";
        double beta = 0.0;
        if (automatic) {
          beta = EstimateBetaStar(data, weights);
        } else {
          std::size_t used = 0;
          try {
            beta = std::stod(args.beta, &used);
          } catch (const std::exception&) {
            used = 0;
          }
          if (used != args.beta.size()) {
            throw Error(ErrorCode::kParseError,
                        "--beta expects 'auto' or a number, got '" + args.beta +
                            "'");
          }
        }
        const int dof = args.dof_loss > 0 ? args.dof_loss : (automatic ? 2 : 1);
        report.config_echo["beta"] = beta;
        report.config_echo["beta_source"] = automatic ? "auto" : "given";
        result = EstimateFromTerms(BaselineAdjustedTerms(data, weights, beta),
                                   dof, args.ci);
      } else {
        const int dof = args.dof_loss > 0 ? args.dof_loss : 1;
        result = EstimateFromTerms(
            DeltaDrTerms(data, *target, *alternative, model(), weights), dof,
            args.ci);
      }
    }
  }
  report.config_echo["dof_loss"] = result.dof_loss;
  report.results.push_back({args.estimator, result});
  report.timing_ms = ElapsedMs(start);
  PrintJson(out, report);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  DataOptions data;
  std::string config;
  std::string which = "dim";
  std::string mode = "empirical";
  int dof_loss = 2;
  std::string model;
  double p = 0.0;
  std::optional<std::uint64_t> seed;
  std::string expect = "approx";
};

int Verify(const VerifyArgs& args, std::ostream& out) {
  const auto start = Clock::now();
  if (args.data.path.empty() == args.config.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                "verify needs exactly one of --data or --config");
  }
  RunReport report;
  report.command = "verify";
  report.config_echo = {{"which", args.which},
                        {"mode", args.mode},
                        {"dof_loss", args.dof_loss},
                        {"expect", args.expect}};

  std::optional<ABExperiment> experiment;
  std::optional<RewardModel> model;
  if (!args.config.empty()) {
    SyntheticConfig config = ReadConfig(args.config);
    if (args.seed) config.seed = *args.seed;
    if (config.framing != Framing::kAB) {
      throw Error(ErrorCode::kWrongFraming, "verify needs an AB config");
    }
    auto generated = GenAbExperiment(config);
    experiment.emplace(std::move(generated.first));
    model.emplace(std::move(generated.second));
    report.config_echo["config"] = ConfigToJson(config);
  } else {
    const Dataset data = LoadDataset(args.data);
    if (data.framing() != Framing::kAB) {
      throw Error(ErrorCode::kWrongFraming, "verify needs A/B data");
    }
    experiment.emplace(data, NominalAllocation(data, args.p));
    report.config_echo["data"] = args.data.path;
  }
  if (!args.model.empty()) model.emplace(ReadRewardModel(args.model));

  const PropensityMode mode = ParseMode(args.mode);
  EquivalenceReport equivalence;
  if (args.which == "dim") {
    equivalence = VerifyDimEquivalence(*experiment, mode, args.dof_loss);
  } else {
    if (!model) {
      throw Error(ErrorCode::kInvalidConfig, "radim verification needs --model");
    }
    equivalence =
        VerifyRadimDrEquivalence(*experiment, *model, mode, args.dof_loss);
  }
  report.results.push_back({args.which + "_equivalence", equivalence});
  report.timing_ms = ElapsedMs(start);
  PrintJson(out, report);

  if (equivalence.verdict == Verdict::kMismatch) return kExitMismatch;
  if (args.expect == "exact" && equivalence.verdict != Verdict::kExactMatch) {
    return kExitMismatch;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::vector<std::string> axes;
  std::size_t replications = 200;
  std::string out;
  std::string mode = "empirical";
  double ci = 0.95;
  std::optional<std::uint64_t> seed;
};

int Sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  SyntheticConfig config = ReadConfig(args.config);
  if (args.seed) config.seed = *args.seed;
  std::vector<SweepAxis> axes;
  for (const auto& text : args.axes) axes.push_back(ParseSweepAxis(text));
  const unsigned threads = SweepThreadsFromEnvironment();
  const auto rows = RunSweep(config, axes, args.replications,
                             ParseMode(args.mode), args.ci, threads);

  std::ofstream csv(args.out, std::ios::trunc);
  if (!csv) throw Error(ErrorCode::kIoError, "cannot write '" + args.out + "'");
  WriteSweepCsv(csv, rows);
  if (!csv) throw Error(ErrorCode::kIoError, "write to '" + args.out + "' failed");

  json summary = {{"command", "sweep"},
                  {"out", args.out},
                  {"rows", rows.size()},
                  {"replications", args.replications},
                  {"threads", threads},
                  {"config_echo", ConfigToJson(config)},
                  {"timing_ms", ElapsedMs(start)}};
  if (args.replications < 2) {
    summary["warnings"] = {"single replication: empirical variance columns "
                           "are empty"};
    err << "warning: a single replication leaves variance columns empty\n";
  }
  PrintJson(out, summary);
  return kExitOk;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError:
      return kExitIo;
    case ErrorCode::kZeroPropensity:
    case ErrorCode::kNonFinitePropensity:
      return kExitZeroPropensity;
    default:
      return kExitBadInput;
  }
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"On- and off-policy treatment effect estimators", "policy_delta"};
  app.require_subcommand(1);

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--config", simulate_args.config, "Generator config")
      ->required();
  simulate->add_option("--out", simulate_args.out, "Output data file")
      ->required();
  simulate->add_option("--seed", simulate_args.seed, "Override the config seed");
  simulate->add_flag("--exhaustive", simulate_args.exhaustive,
                     "Emit the exhaustive enumeration (OPE configs)");

  const std::vector<std::string> modes = {"nominal", "empirical"};

  EstimateArgs estimate_args;
  auto* estimate = app.add_subcommand("estimate", "Run one estimator on a file");
  estimate->add_option("--data", estimate_args.data.path, "Logged data file")
      ->required();
  estimate->add_option("--estimator", estimate_args.estimator)
      ->required()
      ->check(CLI::IsMember({"dim", "radim", "dips", "dbips", "dr", "ddr"}));
  estimate->add_option("--policy", estimate_args.policy, "Target policy file");
  estimate->add_option("--policy-prime", estimate_args.policy_prime,
                       "Alternative policy file");
  estimate->add_option("--model", estimate_args.model, "Reward model file");
  estimate->add_option("--beta", estimate_args.beta, "auto or a number");
  estimate->add_option("--dof-loss", estimate_args.dof_loss)
      ->check(CLI::IsMember({1, 2}));
  estimate->add_option("--mode", estimate_args.mode)->check(CLI::IsMember(modes));
  estimate->add_option("--ci", estimate_args.ci)->check(CLI::Range(0.0, 1.0));
  estimate->add_option("--p", estimate_args.p, "Designed treatment allocation");
  estimate->add_option("--arms", estimate_args.data.arms, "treatment,control");
  estimate->add_option("--action-count", estimate_args.data.action_count);
  estimate->add_flag("--as-ope", estimate_args.as_ope,
                     "Re-frame A/B data as two-action OPE data");
  estimate->add_option("--max-weight", estimate_args.max_weight,
                       "Clip |weights| (biased)");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Check on/off-policy equivalence");
  verify->add_option("--data", verify_args.data.path, "A/B data file");
  verify->add_option("--config", verify_args.config, "AB generator config");
  verify->add_option("--which", verify_args.which)
      ->check(CLI::IsMember({"dim", "radim"}));
  verify->add_option("--mode", verify_args.mode)->check(CLI::IsMember(modes));
  verify->add_option("--dof-loss", verify_args.dof_loss)
      ->check(CLI::IsMember({1, 2}));
  verify->add_option("--model", verify_args.model, "Reward model file");
  verify->add_option("--p", verify_args.p, "Designed treatment allocation");
  verify->add_option("--arms", verify_args.data.arms, "treatment,control");
  verify->add_option("--seed", verify_args.seed, "Override the config seed");
  verify->add_option("--expect", verify_args.expect)
      ->check(CLI::IsMember({"exact", "approx"}));

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo study over a grid");
  sweep->add_option("--config", sweep_args.config, "AB generator config")
      ->required();
  sweep->add_option("--sweep", sweep_args.axes, "e.g. rho=0,0.5,0.8")
      ->required();
  sweep->add_option("--replications", sweep_args.replications)
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_args.out, "CSV output")->required();
  sweep->add_option("--mode", sweep_args.mode)->check(CLI::IsMember(modes));
  sweep->add_option("--ci", sweep_args.ci)->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--seed", sweep_args.seed, "Override the config seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (simulate->parsed()) return Simulate(simulate_args, out);
    if (estimate->parsed()) return Estimate(estimate_args, out, err);
    if (verify->parsed()) return Verify(verify_args, out);
    return Sweep(sweep_args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
}

}  // namespace policy_delta
