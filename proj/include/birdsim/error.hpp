#pragma once

#include <stdexcept>
#include <string>

namespace birdsim {

enum class ErrorCode {
  InvalidArgument,
  OutOfMeasuredRange,
  UnknownNode,
  NoCapableServer,
  UnknownResponse,
  OrderingViolation,
  AlreadySet,
  SchemaError,
  DanglingReference,
  InvariantViolation,
  Io,
  Runtime,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace birdsim
