#include "lexbridge/error.hpp"

namespace lexbridge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPreconditionViolation: return "PreconditionViolation";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kNoAnchors: return "NoAnchors";
    case ErrorCode::kMalformedHeader: return "MalformedHeader";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kDuplicateWord: return "DuplicateWord";
    case ErrorCode::kUnknownWord: return "UnknownWord";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDecompositionFailure: return "DecompositionFailure";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNoEvaluablePairs: return "NoEvaluablePairs";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kNotEnoughSentences: return "NotEnoughSentences";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPreconditionViolation:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kMalformedHeader:
    case ErrorCode::kMalformedRow:
    case ErrorCode::kDuplicateWord:
    case ErrorCode::kScoreOutOfRange:
      return true;
    default:
      return false;
  }
}

}  // namespace lexbridge
