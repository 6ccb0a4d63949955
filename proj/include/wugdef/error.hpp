#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wugdef {

enum class ErrorCode {
  kIo,
  kParse,
  kInvalidArgument,
  // wug-data
  kMissingColumn,
  kDanglingReference,
  kDuplicateUsageId,
  kInvalidGraph,
  // datasets
  kEmptyField,
  kUnknownSplit,
  kUndefinedRatio,
  // lexicon
  kDuplicateSenseId,
  kEmptyLexicon,
  // embeddings
  kProviderUnavailable,
  kEmptyText,
  kZeroVector,
  kDimMismatch,
  kEmptyInput,
  // labelers
  kLemmaNotInLexicon,
  kNoJudgedPairs,
  kInvalidTemplate,
  kGeneratorUnavailable,
  kMissingPregenerated,
  kEmptyGeneration,
  // metrics / evalkit
  kInsufficientData,
  kEmptySet,
  kUnknownItem,
  kDuplicateRecord,
  // service
  kConfigInvalid,
  kPortBusy,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI, the HTTP layer) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wugdef
