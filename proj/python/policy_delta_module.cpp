// Python bindings: a thin layer over the C++ core. Records travel as dicts
// with the same keys as the JSON-lines file format.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "policy_delta/cli.hpp"
#include "policy_delta/equivalence.hpp"
#include "policy_delta/io.hpp"
#include "policy_delta/offpolicy.hpp"
#include "policy_delta/onpolicy.hpp"
#include "policy_delta/report.hpp"
#include "policy_delta/sweep.hpp"
#include "policy_delta/synthgen.hpp"

namespace py = pybind11;
using namespace policy_delta;
using nlohmann::json;

namespace {

json ToJson(const py::handle& obj) {
  const auto dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(obj).cast<std::string>());
}

py::object FromJson(const json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

Framing ParseFraming(const std::string& name) {
  if (name == "AB" || name == "ab") return Framing::kAB;
  if (name == "OPE" || name == "ope") return Framing::kOPE;
  throw Error(ErrorCode::kWrongFraming, "framing must be 'AB' or 'OPE'");
}

PropensityMode ParseMode(const std::string& name) {
  if (name == "nominal") return PropensityMode::kNominal;
  if (name == "empirical") return PropensityMode::kEmpirical;
  throw Error(ErrorCode::kInvalidConfig, "mode must be 'nominal' or 'empirical'");
}

// Round-trips through the JSON-lines codec so Python sees exactly the file
// format's keys and validation.
std::vector<LoggedRecord> RecordsFromPython(const py::list& records) {
  std::ostringstream lines;
  for (const auto& r : records) lines << ToJson(r).dump() << '\n';
  std::istringstream in(lines.str());
  return ParseRecordsJsonLines(in);
}

py::list RecordsToPython(const Dataset& data) {
  std::ostringstream out;
  WriteRecordsJsonLines(out, data);
  py::list result;
  std::istringstream in(out.str());
  for (std::string line; std::getline(in, line);) {
    result.append(FromJson(json::parse(line)));
  }
  return result;
}

Dataset MakeDataset(std::vector<LoggedRecord> rs,
                    std::optional<std::string> framing,
                    std::optional<int> action_count) {
  Framing f = Framing::kOPE;
  if (framing) {
    f = ParseFraming(*framing);
  } else if (!rs.empty() && std::all_of(rs.begin(), rs.end(), [](const auto& r) {
               return r.arm.has_value();
             })) {
    f = Framing::kAB;
  }
  DatasetOptions options;
  if (f == Framing::kOPE) options.action_count = action_count;
  return ValidateDataset(std::move(rs), f, options);
}

SyntheticConfig ConfigFromPython(const py::dict& config) {
  return ParseConfig(ToJson(config).dump());
}

double NominalP(const Dataset& data, std::optional<double> p) {
  if (p) return *p;
  for (const auto& r : data.records()) {
    if (data.IsTreatment(r)) return r.logging_propensity;
  }
  throw Error(ErrorCode::kEmptyArm, "treatment arm has no records");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Off-policy estimators of value differences and their A/B-test "
            "equivalents.";

  // Messages carry the error code name as a prefix, e.g. "ZeroPropensity: ...".
  py::register_exception<Error>(m, "PolicyDeltaError", PyExc_ValueError);

  py::class_<EstimateResult>(m, "EstimateResult")
      .def_readonly("point", &EstimateResult::point)
      .def_readonly("variance_of_mean", &EstimateResult::variance_of_mean)
      .def_readonly("stderr", &EstimateResult::std_error)
      .def_readonly("dof_loss", &EstimateResult::dof_loss)
      .def_readonly("ci_low", &EstimateResult::ci_low)
      .def_readonly("ci_high", &EstimateResult::ci_high)
      .def_readonly("ci_level", &EstimateResult::ci_level)
      .def_readonly("n_used", &EstimateResult::n_used)
      .def("to_dict", [](const EstimateResult& r) { return FromJson(r); })
      .def("__repr__", [](const EstimateResult& r) {
        return "EstimateResult(" + json(r).dump() + ")";
      });

  py::class_<EquivalenceReport>(m, "EquivalenceReport")
      .def_readonly("onpolicy", &EquivalenceReport::onpolicy)
      .def_readonly("offpolicy", &EquivalenceReport::offpolicy)
      .def_readonly("point_abs_diff", &EquivalenceReport::point_abs_diff)
      .def_readonly("variance_rel_diff", &EquivalenceReport::variance_rel_diff)
      .def_readonly("variance_ratio", &EquivalenceReport::variance_ratio)
      .def_readonly("beta_star", &EquivalenceReport::beta_star)
      .def_property_readonly("verdict", [](const EquivalenceReport& r) {
        return std::string(VerdictName(r.verdict));
      })
      .def("to_dict", [](const EquivalenceReport& r) { return FromJson(r); });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const py::list& records, std::optional<std::string> framing,
                       std::optional<int> action_count) {
             return MakeDataset(RecordsFromPython(records), framing, action_count);
           }),
           py::arg("records"),
           py::arg("framing") = py::none(), py::arg("action_count") = py::none())
      .def_static("read", [](const std::string& path,
                             std::optional<std::string> framing,
                             std::optional<int> action_count) {
        return MakeDataset(ReadRecords(path), framing, action_count);
      }, py::arg("path"), py::arg("framing") = py::none(),
         py::arg("action_count") = py::none())
      .def("__len__", &Dataset::size)
      .def_property_readonly("framing", [](const Dataset& d) {
        return std::string(FramingName(d.framing()));
      })
      .def_property_readonly("action_count", &Dataset::action_count)
      .def("records", &RecordsToPython)
      .def("write", [](const Dataset& d, const std::string& path) {
        WriteDataset(path, d);
      });

  py::class_<PolicyTable>(m, "PolicyTable")
      .def(py::init<std::vector<std::vector<double>>>(), py::arg("probabilities"))
      .def_static("broadcast", &PolicyTable::Broadcast)
      .def_static("point_mass", &PolicyTable::PointMass)
      .def_static("uniform", &PolicyTable::Uniform)
      .def("prob", &PolicyTable::Prob)
      .def_property_readonly("action_count", &PolicyTable::action_count);

  py::class_<RewardModel>(m, "RewardModel")
      .def_static("constant", &RewardModel::Constant)
      .def_static("linear", &RewardModel::Linear, py::arg("intercept"),
                  py::arg("coefficients"))
      .def_static("per_record", &RewardModel::PerRecord)
      .def_static("context_table", &RewardModel::ContextTable)
      .def_static("action_table", &RewardModel::ActionTable)
      .def_property_readonly("action_agnostic", &RewardModel::action_agnostic);

  m.def("sample_mean", [](std::vector<double> v) { return SampleMean(v); });
  m.def("sample_variance", [](std::vector<double> v, int dof_loss) {
    return SampleVariance(v, dof_loss);
  }, py::arg("values"), py::arg("dof_loss"));
  m.def("difference_in_means", [](std::vector<double> a, std::vector<double> b,
                                  double ci) { return DifferenceInMeans(a, b, ci); },
        py::arg("treatment"), py::arg("control"), py::arg("ci_level") = 0.95);
  m.def("dim_estimate", [](const Dataset& d, double ci) {
    const auto [t, c] = SplitByArm(d);
    return DimEstimate(t, c, ci);
  }, py::arg("data"), py::arg("ci_level") = 0.95);
  m.def("radim_estimate", [](const Dataset& d, const RewardModel& f, double ci) {
    const auto [t, c] = SplitByArm(d);
    return RadimEstimate(t, c, f, ci);
  }, py::arg("data"), py::arg("model"), py::arg("ci_level") = 0.95);

  m.def("delta_weight", py::overload_cast<double, double, double>(&DeltaWeight));
  m.def("delta_ips_estimate", &DeltaIpsEstimate, py::arg("data"),
        py::arg("policy"), py::arg("policy_prime"), py::arg("ci_level") = 0.95);
  m.def("estimate_beta_star",
        py::overload_cast<const Dataset&, const PolicyTable&, const PolicyTable&>(
            &EstimateBetaStar),
        py::arg("data"), py::arg("policy"), py::arg("policy_prime"));
  m.def("delta_beta_ips_estimate", &DeltaBetaIpsEstimate, py::arg("data"),
        py::arg("policy"), py::arg("policy_prime"), py::arg("beta"),
        py::arg("dof_loss") = 1, py::arg("ci_level") = 0.95);
  m.def("dr_estimate", &DrEstimate, py::arg("data"), py::arg("policy"),
        py::arg("model"), py::arg("ci_level") = 0.95);
  m.def("delta_dr_estimate", &DeltaDrEstimate, py::arg("data"),
        py::arg("policy"), py::arg("policy_prime"), py::arg("model"),
        py::arg("dof_loss") = 1, py::arg("ci_level") = 0.95);
  m.def("bessel_factor", &BesselFactor);

  m.def("ab_to_ope", [](const Dataset& d, std::optional<double> p,
                        const std::string& mode) {
    return AbToOpe(ABExperiment(d, NominalP(d, p)), ParseMode(mode));
  }, py::arg("data"), py::arg("p") = py::none(), py::arg("mode") = "empirical");
  m.def("treatment_policy", &TreatmentPolicy);
  m.def("control_policy", &ControlPolicy);
  m.def("beta_star_ab", &BetaStarAb, py::arg("mu_t"), py::arg("mu_c"), py::arg("p"));
  m.def("verify_dim_equivalence", [](const Dataset& d, std::optional<double> p,
                                     const std::string& mode, int dof_loss) {
    return VerifyDimEquivalence(ABExperiment(d, NominalP(d, p)), ParseMode(mode),
                                dof_loss);
  }, py::arg("data"), py::arg("p") = py::none(), py::arg("mode") = "empirical",
        py::arg("dof_loss") = 2);
  m.def("verify_radim_dr_equivalence", [](const Dataset& d, const RewardModel& f,
                                          std::optional<double> p,
                                          const std::string& mode, int dof_loss) {
    return VerifyRadimDrEquivalence(ABExperiment(d, NominalP(d, p)), f,
                                    ParseMode(mode), dof_loss);
  }, py::arg("data"), py::arg("model"), py::arg("p") = py::none(),
        py::arg("mode") = "empirical", py::arg("dof_loss") = 2);

  m.def("gen_ab_experiment", [](const py::dict& config) {
    auto [exp, model] = GenAbExperiment(ConfigFromPython(config));
    return py::make_tuple(exp.data(), model);
  }, py::arg("config"));
  m.def("gen_bandit_logs", [](const py::dict& config) {
    auto [data, logging] = GenBanditLogs(ConfigFromPython(config));
    return py::make_tuple(data, logging);
  }, py::arg("config"));
  m.def("exhaustive_dataset", [](const py::dict& config) {
    return ExhaustiveDataset(ConfigFromPython(config));
  }, py::arg("config"));
  m.def("true_policy_value", [](const PolicyTable& pi, const py::dict& config) {
    return TruePolicyValue(pi, ConfigFromPython(config));
  }, py::arg("policy"), py::arg("config"));

  m.def("run_study", [](const py::dict& config, std::size_t replications,
                        const std::string& mode, double ci,
                        std::optional<unsigned> threads) {
    const SyntheticConfig cfg = ConfigFromPython(config);
    const PropensityMode m = ParseMode(mode);
    StudyResult s;
    {
      py::gil_scoped_release release;
      s = RunStudy(cfg, replications, m, ci,
                   threads.value_or(SweepThreadsFromEnvironment()));
    }
    py::dict out;
    for (std::size_t k = 0; k < kStudyEstimators.size(); ++k) {
      const auto& e = s.estimators[k];
      py::dict row;
      row["mean_point"] = e.mean_point;
      row["bias"] = e.bias;
      row["empirical_variance"] =
          e.empirical_variance ? py::cast(*e.empirical_variance) : py::none();
      row["mean_estimated_variance"] = e.mean_estimated_variance;
      row["coverage_pct"] = e.coverage_pct;
      out[py::str(std::string(StudyEstimatorName(kStudyEstimators[k])))] = row;
    }
    return out;
  }, py::arg("config"), py::arg("replications"), py::arg("mode") = "empirical",
        py::arg("ci_level") = 0.95, py::arg("threads") = py::none());

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = RunCli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command-line tool in-process; returns "
                      "(exit_code, stdout, stderr).");
}
