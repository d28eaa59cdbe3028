#ifndef POLICY_DELTA_ERRORS_HPP
#define POLICY_DELTA_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace policy_delta {

enum class ErrorCode {
  kEmptyDataset,
  kNonFinitePropensity,
  kNonFiniteReward,
  kUnknownArmLabel,
  kActionOutOfRange,
  kWrongFraming,
  kEmptyArm,
  kNonFiniteExpectedReward,
  kEmptyInput,
  kInsufficientData,
  kActionAwareModelRejected,
  kZeroVariancePredictor,
  kZeroVarianceOutcome,
  kZeroPropensity,
  kDegenerateWeights,
  kUnknownActionSet,
  kInvalidPolicy,
  kInvalidAllocation,
  kInvalidConfig,
  kParseError,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI and the Python bindings can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace policy_delta

#endif  // POLICY_DELTA_ERRORS_HPP
