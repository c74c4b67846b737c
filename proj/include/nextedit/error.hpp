#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nextedit {

enum class ErrorCode {
  ContentMismatch,
  FileMissing,
  EmptySpan,
  InvalidPath,
  InvalidArgument,
  MalformedDiff,
  MalformedEncoding,
  InconsistentMapping,
  RepoUnreadable,
  CheckoutFailed,
  ReplayDesync,
  EmptyCorpus,
  LengthMismatch,
  LaunchFailed,
  HandshakeTimeout,
  TransportClosed,
  ServerError,
  Timeout,
  BackendUnavailable,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nextedit
