#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgeward {

enum class ErrorKind {
  InvalidArgument,
  NoRoute,
  PastEvent,
  NodeDown,
  Infeasible,
  InsufficientSamples,
  EmptyWindow,
  EmptyHistory,
  NegotiationFailed,
  TooLarge,
  NotFound,
  DuplicateId,
  AllZero,
  SingleClass,
  DatasetMissing,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries one of the kinds above so
// callers (and the CLI exit-code mapping) can dispatch without string
// matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace edgeward
