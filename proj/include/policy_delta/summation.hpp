#ifndef POLICY_DELTA_SUMMATION_HPP
#define POLICY_DELTA_SUMMATION_HPP

#include <cmath>
#include <span>

namespace policy_delta {

// Neumaier-compensated running sum. Summation order is the insertion order,
// so results are bit-reproducible for a fixed input sequence.
class CompensatedSum {
 public:
  void Add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  double Total() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double StableSum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.Add(v);
  return acc.Total();
}

// Sum of squared deviations from `center`.
inline double SumSquaredDeviations(std::span<const double> values,
                                   double center) {
  CompensatedSum acc;
  for (double v : values) {
    const double d = v - center;
    acc.Add(d * d);
  }
  return acc.Total();
}

}  // namespace policy_delta

#endif  // POLICY_DELTA_SUMMATION_HPP
