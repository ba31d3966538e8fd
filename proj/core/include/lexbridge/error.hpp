#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexbridge {

enum class ErrorCode {
  kPreconditionViolation,
  kInvalidConfig,
  kIoError,
  kEmptyCorpus,
  kEmptyVocabulary,
  kNoAnchors,
  kMalformedHeader,
  kMalformedRow,
  kDuplicateWord,
  kUnknownWord,
  kNonFinite,
  kDecompositionFailure,
  kDivergence,
  kDimensionMismatch,
  kNoEvaluablePairs,
  kEmptyBatch,
  kNotEnoughSentences,
  kScoreOutOfRange,
};

std::string_view to_string(ErrorCode code);

/// Validation errors map to exit code 1 in the CLI, everything else to 2.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kPreconditionViolation, message);
}

}  // namespace lexbridge
