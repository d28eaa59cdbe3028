// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything holds).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "policy_delta/equivalence.hpp"
#include "policy_delta/offpolicy.hpp"
#include "policy_delta/onpolicy.hpp"
#include "policy_delta/sweep.hpp"
#include "policy_delta/synthgen.hpp"

using namespace policy_delta;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Check(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void Run(int id, const char* title, double budget_s,
         const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.Check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (secs >= budget_s) {
    o.Check(false, "runtime " + std::to_string(secs) + " s over budget");
  }
  std::printf("criterion %d: %s  %s (%.2f s, budget %.0f s) %s\n", id,
              o.pass ? "PASS" : "FAIL", title, secs, budget_s,
              o.detail.str().c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::size_t LogUniformSize(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return static_cast<std::size_t>(std::llround(std::exp(u(rng))));
}

// Random two-arm experiment with Bernoulli(p) assignment, at least two
// units per arm.
ABExperiment RandomExperiment(std::mt19937_64& rng, std::size_t n, double p) {
  std::binomial_distribution<std::size_t> draw(n, p);
  std::size_t n_t = draw(rng);
  n_t = std::clamp<std::size_t>(n_t, 2, n - 2);
  return ABExperiment(
      ValidateDataset(oracle::RandomAbRecords(n_t, n - n_t, p, rng), Framing::kAB),
      p);
}

ABExperiment BalancedExperiment(std::mt19937_64& rng, std::size_t half) {
  return ABExperiment(
      ValidateDataset(oracle::RandomAbRecords(half, half, 0.5, rng), Framing::kAB),
      0.5);
}

double AllocationGrid(std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(1, 9)(rng) / 10.0;
}

double RelDiff(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Random action-agnostic model: nonlinear in the covariate.
RewardModel RandomAgnosticModel(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  const double a = g(rng), b = g(rng), c = g(rng);
  return RewardModel::Agnostic([a, b, c](const LoggedRecord& r) {
    const double u = r.covariates[0];
    return a + b * u + c * std::sin(u);
  });
}

std::vector<std::vector<double>> RationalTable(std::mt19937_64& rng, int xs,
                                               int as, int denominator) {
  // Split `denominator` units among actions, each getting at least one.
  std::vector<std::vector<double>> t(xs, std::vector<double>(as));
  for (auto& row : t) {
    std::vector<int> units(as, 1);
    for (int k = as; k < denominator; ++k) {
      ++units[std::uniform_int_distribution<int>(0, as - 1)(rng)];
    }
    for (int a = 0; a < as; ++a) row[a] = static_cast<double>(units[a]) / denominator;
  }
  return t;
}

std::vector<std::vector<double>> RandomPolicyTable(std::mt19937_64& rng, int xs,
                                                   int as) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> t(xs, std::vector<double>(as));
  for (auto& row : t) {
    double total = 0;
    for (double& v : row) total += (v = u(rng) * u(rng));
    for (double& v : row) v /= total;
  }
  return t;
}

}  // namespace

int main() {
  Run(1, "DiM point == Δβ-IPS point (empirical mode), 100 instances", 10,
      [](Outcome& o) {
        std::mt19937_64 rng(20241);
        std::normal_distribution<double> g(0, 10);
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
          const std::size_t n = LogUniformSize(rng, 10, 1e5);
          const double p = AllocationGrid(rng);
          const ABExperiment e = RandomExperiment(rng, n, p);
          const auto [t, c] = SplitByArm(e.data());
          const auto ref = oracle::Dim(MakeSample(t).values, MakeSample(c).values);
          const double dim = DimEstimate(t, c).point;
          o.Check(std::abs(dim - static_cast<double>(ref.point)) < 1e-10,
                  "DiM vs naive oracle");
          const Dataset ope = AbToOpe(e, PropensityMode::kEmpirical);
          const double plug =
              EstimateBetaStar(ope, TreatmentPolicy(), ControlPolicy());
          for (double beta : {0.0, plug, g(rng)}) {
            const double off = DeltaBetaIpsEstimate(ope, TreatmentPolicy(),
                                                    ControlPolicy(), beta, 2)
                                   .point;
            worst = std::max(worst, std::abs(off - dim));
          }
        }
        o.Check(worst < 1e-10, "point difference");
        o.detail << "max |Δ| = " << worst;
      });

  Run(2, "variance identity at balance; dof_loss=1 ratio (N-1)/(N-2)", 10,
      [](Outcome& o) {
        std::mt19937_64 rng(20242);
        double worst_rel = 0, worst_ratio = 0;
        for (int i = 0; i < 100; ++i) {
          const std::size_t half = LogUniformSize(rng, 5, 5e4);
          const ABExperiment e = BalancedExperiment(rng, half);
          const double n = static_cast<double>(e.data().size());
          const auto two = VerifyDimEquivalence(e, PropensityMode::kEmpirical, 2);
          worst_rel = std::max(worst_rel, two.variance_rel_diff);
          const auto one = VerifyDimEquivalence(e, PropensityMode::kEmpirical, 1);
          worst_ratio =
              std::max(worst_ratio, std::abs(one.variance_ratio - (n - 1) / (n - 2)));
        }
        o.Check(worst_rel < 1e-10, "dof 2 relative variance difference");
        o.Check(worst_ratio < 1e-12, "dof 1 variance ratio");
        o.detail << "max rel = " << worst_rel << ", max ratio err = " << worst_ratio;
      });

  Run(3, "RADiM == Δ-DR with centred action-agnostic f", 10, [](Outcome& o) {
    std::mt19937_64 rng(20243);
    double worst_point = 0, worst_rel = 0, worst_ratio = 0;
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = LogUniformSize(rng, 10, 1e5);
      const ABExperiment e = RandomExperiment(rng, n, AllocationGrid(rng));
      const RewardModel f = RandomAgnosticModel(rng);
      const auto rep = VerifyRadimDrEquivalence(e, f, PropensityMode::kEmpirical, 2);
      worst_point = std::max(worst_point, rep.point_abs_diff);

      // Independent check of the on-policy side.
      const auto [t, c] = SplitByArm(e.data());
      const auto ref =
          oracle::Dim(MakeSample(t, &f).values, MakeSample(c, &f).values);
      o.Check(std::abs(rep.onpolicy.point - static_cast<double>(ref.point)) < 1e-10,
              "RADiM vs naive oracle");

      const ABExperiment b = BalancedExperiment(rng, std::max<std::size_t>(n / 2, 3));
      const double nb = static_cast<double>(b.data().size());
      const auto two = VerifyRadimDrEquivalence(b, f, PropensityMode::kEmpirical, 2);
      worst_point = std::max(worst_point, two.point_abs_diff);
      worst_rel = std::max(worst_rel, two.variance_rel_diff);
      const auto one = VerifyRadimDrEquivalence(b, f, PropensityMode::kEmpirical, 1);
      worst_ratio =
          std::max(worst_ratio, std::abs(one.variance_ratio - (nb - 1) / (nb - 2)));
    }
    o.Check(worst_point < 1e-10, "point difference");
    o.Check(worst_rel < 1e-10, "balanced variance difference");
    o.Check(worst_ratio < 1e-12, "dof 1 variance ratio");
    o.detail << "max |Δ| = " << worst_point << ", max rel = " << worst_rel
             << ", max ratio err = " << worst_ratio;
  });

  Run(4, "DR correction vanishes for action-agnostic f (10^4 records)", 10,
      [](Outcome& o) {
        std::mt19937_64 rng(20244);
        const int xs = 50, as = 5;
        const PolicyTable pi(RandomPolicyTable(rng, xs, as));
        const PolicyTable alt(RandomPolicyTable(rng, xs, as));
        std::normal_distribution<double> g(0, 3);
        std::size_t nonzero = 0;
        for (int i = 0; i < 10000; ++i) {
          LoggedRecord r;
          r.context_id = i % xs;
          r.covariates = {g(rng), g(rng)};
          r.action = i % as;
          r.reward = g(rng);
          r.logging_propensity = 0.2;
          const RewardModel f = RewardModel::Linear(g(rng), {g(rng), g(rng)});
          if (DeltaDrCorrection(r, pi, alt, f, as) != 0.0) ++nonzero;
        }
        o.Check(nonzero == 0, "non-zero correction terms");
        o.detail << nonzero << " non-zero terms";
      });

  Run(5, "exhaustive enumeration: Δ-IPS and Δ-DR equal V(π) - V(π')", 1,
      [](Outcome& o) {
        std::mt19937_64 rng(20245);
        std::uniform_real_distribution<double> u(-5, 5);
        double worst = 0;
        for (int i = 0; i < 200; ++i) {
          const int xs = 1 + i % 4, as = 2 + (i / 4) % 3;
          SyntheticConfig cfg;
          cfg.framing = Framing::kOPE;
          cfg.context_count = xs;
          cfg.action_count = as;
          cfg.reward_table.assign(xs, std::vector<double>(as));
          for (auto& row : cfg.reward_table) {
            for (double& v : row) v = u(rng);
          }
          cfg.logging_table = RationalTable(rng, xs, as, 4 * (1 + i % 4));
          const Dataset d = ExhaustiveDataset(cfg);

          const auto pi_t = RandomPolicyTable(rng, xs, as);
          const auto alt_t = RandomPolicyTable(rng, xs, as);
          const std::vector<double> px(xs, 1.0 / xs);
          const double truth =
              static_cast<double>(oracle::Value(pi_t, px, cfg.reward_table) -
                                  oracle::Value(alt_t, px, cfg.reward_table));
          o.Check(std::abs(TruePolicyValue(PolicyTable(pi_t), cfg) -
                           TruePolicyValue(PolicyTable(alt_t), cfg) - truth) <
                      1e-12,
                  "library oracle vs brute force");

          std::vector<std::vector<double>> wrong(xs, std::vector<double>(as));
          for (auto& row : wrong) {
            for (double& v : row) v = u(rng);
          }
          const PolicyTable pi(pi_t), alt(alt_t);
          const double ips = DeltaIpsEstimate(d, pi, alt).point;
          const double dr =
              DeltaDrEstimate(d, pi, alt, RewardModel::ActionTable(wrong)).point;
          worst = std::max({worst, std::abs(ips - truth), std::abs(dr - truth)});
        }
        o.Check(worst < 1e-10, "estimate vs truth");
        o.detail << "max |err| = " << worst;
      });

  Run(6, "Var(RADiM)/Var(DiM) ≈ 1 - ρ² (N=10^4, R=2000)", 120, [](Outcome& o) {
    SyntheticConfig cfg;
    cfg.n = 10000;
    cfg.seed = 6;
    cfg.p = 0.5;
    cfg.ate = 0.2;
    const auto rows =
        RunSweep(cfg, {ParseSweepAxis("rho=0,0.5,0.8")}, 2000,
                 PropensityMode::kEmpirical, 0.95, SweepThreadsFromEnvironment());
    for (const auto& row : rows) {
      const double ratio = *row.estimators[1].empirical_variance /
                           *row.estimators[0].empirical_variance;
      const double expected = 1 - row.config.rho * row.config.rho;
      o.Check(std::abs(ratio - expected) <= 0.05,
              "rho=" + std::to_string(row.config.rho));
      o.detail << "rho=" << row.config.rho << ": " << ratio << " (law "
               << expected << ") ";
    }
  });

  Run(7, "95% CI coverage in [93.5, 96.5] for all four estimators", 180,
      [](Outcome& o) {
        SyntheticConfig cfg;
        cfg.n = 10000;
        cfg.seed = 7;
        cfg.ate = 0.1;
        cfg.rho = 0.7;
        const auto rows =
            RunSweep(cfg, {ParseSweepAxis("p=0.25,0.5")}, 2000,
                     PropensityMode::kEmpirical, 0.95, SweepThreadsFromEnvironment());
        for (const auto& row : rows) {
          o.detail << "p=" << row.config.p << ":";
          for (std::size_t k = 0; k < kStudyEstimators.size(); ++k) {
            const auto& s = row.estimators[k];
            const std::string name(StudyEstimatorName(kStudyEstimators[k]));
            o.Check(s.coverage_pct >= 93.5 && s.coverage_pct <= 96.5,
                    name + " coverage at p=" + std::to_string(row.config.p));
            // Unbiasedness: mean point within 4 Monte Carlo standard errors.
            const double mc_se = std::sqrt(*s.empirical_variance / 2000.0);
            o.Check(std::abs(s.bias) < 4 * mc_se,
                    name + " bias at p=" + std::to_string(row.config.p));
            o.detail << ' ' << name << '=' << s.coverage_pct << '%';
          }
          o.detail << "; ";
        }
      });

  Run(8, "plug-in β* == (1-p̂)μ_T + p̂μ_C, 100 instances", 10, [](Outcome& o) {
    std::mt19937_64 rng(20248);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
      const std::size_t n = LogUniformSize(rng, 10, 1e5);
      const ABExperiment e = RandomExperiment(rng, n, AllocationGrid(rng));
      const auto [t, c] = SplitByArm(e.data());
      const double p_hat = static_cast<double>(t.size()) / e.data().size();
      const long double closed =
          (1 - p_hat) * oracle::Mean(MakeSample(t).values) +
          p_hat * oracle::Mean(MakeSample(c).values);
      const double plug = EstimateBetaStar(AbToOpe(e, PropensityMode::kEmpirical),
                                           TreatmentPolicy(), ControlPolicy());
      worst = std::max(worst, static_cast<double>(std::abs(plug - closed)));
    }
    o.Check(worst < 1e-12, "β* difference");
    o.detail << "max |Δ| = " << worst;
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
