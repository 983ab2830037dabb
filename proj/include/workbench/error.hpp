#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace workbench {

enum class ErrorCode {
  MalformedJson,
  SchemaViolation,
  IdentifierMismatch,
  CardinalityError,
  SectionMismatch,
  UnknownLabel,
  EmptyContext,
  MissingAttachment,
  TemplateCorruption,
  ProviderError,
  ReplayMiss,
  AuthMissing,
  PlanIncomplete,
  SampleTooLarge,
  UnknownHypothesis,
  UnknownCode,
  NonBinaryCell,
  DuplicateRow,
  CountExceedsRows,
  RankDeficient,
  DimensionMismatch,
  InvalidP,
  RowMismatch,
  NoMatrix,
  UnknownFamily,
  PortBusy,
  StoreLocked,
  RunReferenced,
  DuplicateName,
  InvalidArgument,
  Io,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every failure the core reports is an Error carrying one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Transport/HTTP failure after the retry budget is spent.
class ProviderFailure : public Error {
 public:
  ProviderFailure(const std::string& message, int attempts, int last_status)
      : Error(ErrorCode::ProviderError, message),
        attempts_(attempts),
        last_status_(last_status) {}

  int attempts() const noexcept { return attempts_; }
  // 0 when no HTTP response was received.
  int last_status() const noexcept { return last_status_; }

 private:
  int attempts_;
  int last_status_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace workbench
