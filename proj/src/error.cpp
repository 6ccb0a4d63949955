#include "wugdef/error.hpp"

namespace wugdef {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kDuplicateUsageId: return "DuplicateUsageId";
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kEmptyField: return "EmptyField";
    case ErrorCode::kUnknownSplit: return "UnknownSplit";
    case ErrorCode::kUndefinedRatio: return "UndefinedRatio";
    case ErrorCode::kDuplicateSenseId: return "DuplicateSenseId";
    case ErrorCode::kEmptyLexicon: return "EmptyLexicon";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kLemmaNotInLexicon: return "LemmaNotInLexicon";
    case ErrorCode::kNoJudgedPairs: return "NoJudgedPairs";
    case ErrorCode::kInvalidTemplate: return "InvalidTemplate";
    case ErrorCode::kGeneratorUnavailable: return "GeneratorUnavailable";
    case ErrorCode::kMissingPregenerated: return "MissingPregenerated";
    case ErrorCode::kEmptyGeneration: return "EmptyGeneration";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kUnknownItem: return "UnknownItem";
    case ErrorCode::kDuplicateRecord: return "DuplicateRecord";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kPortBusy: return "PortBusy";
  }
  return "Unknown";
}

}  // namespace wugdef
