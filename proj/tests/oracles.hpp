// Independent reference computations for tests. Deliberately naive: plain
// loops in long double, straight from the textbook formulas, sharing no code
// with the library beyond the data types.
#ifndef POLICY_DELTA_TESTS_ORACLES_HPP
#define POLICY_DELTA_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "policy_delta/core_data.hpp"

namespace oracle {

inline long double Mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return s / static_cast<long double>(v.size());
}

inline long double Variance(const std::vector<double>& v, int dof_loss) {
  const long double m = Mean(v);
  long double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<long double>(v.size() - dof_loss);
}

struct PointVar {
  long double point;
  long double variance;
};

// Welch-style difference in means: per-arm variance over n_k - 1, divided
// by n_k.
inline PointVar Dim(const std::vector<double>& t, const std::vector<double>& c) {
  return {Mean(t) - Mean(c),
          Variance(t, 1) / static_cast<long double>(t.size()) +
              Variance(c, 1) / static_cast<long double>(c.size())};
}

// Mean of per-record terms with variance Σ(z - z̄)² / ((n - dof) n).
inline PointVar TermMean(const std::vector<double>& z, int dof_loss) {
  const long double n = static_cast<long double>(z.size());
  return {Mean(z), Variance(z, dof_loss) / n};
}

// Brute-force V(π) = Σ_x P(x) Σ_a π(a|x) r(x,a).
inline long double Value(const std::vector<std::vector<double>>& pi,
                         const std::vector<double>& px,
                         const std::vector<std::vector<double>>& reward) {
  long double v = 0;
  for (std::size_t x = 0; x < px.size(); ++x) {
    for (std::size_t a = 0; a < reward[x].size(); ++a) {
      v += static_cast<long double>(px[x]) * pi[x][a] * reward[x][a];
    }
  }
  return v;
}

// Δβ-IPS straight from the records: z = (π - π')/π0 · (y - β).
inline PointVar DeltaBetaIps(const std::vector<policy_delta::LoggedRecord>& rs,
                             const std::vector<std::vector<double>>& pi,
                             const std::vector<std::vector<double>>& pi_alt,
                             double beta, int dof_loss) {
  std::vector<double> z;
  for (const auto& r : rs) {
    const auto x = static_cast<std::size_t>(r.context_id);
    const auto a = static_cast<std::size_t>(r.action);
    const double w = (pi[x][a] - pi_alt[x][a]) / r.logging_propensity;
    z.push_back(w * (r.reward - beta));
  }
  return TermMean(z, dof_loss);
}

inline long double BetaStar(const std::vector<double>& w,
                            const std::vector<double>& y) {
  long double num = 0, den = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += static_cast<long double>(w[i]) * w[i] * y[i];
    den += static_cast<long double>(w[i]) * w[i];
  }
  return num / den;
}

// A two-arm record set with arbitrary (skewed, non-Gaussian) outcomes and a
// scalar covariate. Exactly `n_t` records are treated; order is shuffled.
inline std::vector<policy_delta::LoggedRecord> RandomAbRecords(
    std::size_t n_t, std::size_t n_c, double p, std::mt19937_64& rng) {
  std::exponential_distribution<double> skew(1.3);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::vector<policy_delta::LoggedRecord> rs;
  for (std::size_t i = 0; i < n_t + n_c; ++i) {
    policy_delta::LoggedRecord r;
    const bool treated = i < n_t;
    const double u = gauss(rng);
    r.context_id = static_cast<std::int64_t>(i);
    r.covariates = {u};
    r.arm = treated ? "T" : "C";
    r.action = treated ? 0 : 1;
    r.reward = 3.0 + 0.7 * u + (treated ? 0.4 : 0.0) + skew(rng);
    r.logging_propensity = treated ? p : 1.0 - p;
    rs.push_back(std::move(r));
  }
  std::shuffle(rs.begin(), rs.end(), rng);
  return rs;
}

}  // namespace oracle

#endif  // POLICY_DELTA_TESTS_ORACLES_HPP
