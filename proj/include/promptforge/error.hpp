#pragma once

#include <stdexcept>
#include <string>

namespace promptforge {

enum class ErrorCode {
  InvalidCorpus,
  InvalidConfig,
  InvalidArgument,
  MissingContextKey,
  BackendUnavailable,
  MalformedResponse,
  AdapterFailure,
  UnparseableReport,
  BadTemplate,
  UniverseMismatch,
  IOFailure,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MissingContextKey : public Error {
 public:
  explicit MissingContextKey(std::string key)
      : Error(ErrorCode::MissingContextKey, "missing context key: " + key),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace promptforge
