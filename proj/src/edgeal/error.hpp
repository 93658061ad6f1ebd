#pragma once

#include <stdexcept>
#include <string>

namespace edgeal {

enum class ErrorCode {
  invalid_argument = 1,
  io = 2,
  format = 3,
  dimension = 4,
  range = 5,
  state = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Reasons a tensor file can fail to parse. Each maps to its own message so
// callers (and tests) can tell them apart without string matching.
enum class ParseFailure {
  bad_magic,
  unsupported_version,
  unsupported_dtype,
  unsupported_rank,
  bad_dims,
  truncated,
  trailing_bytes,
};

class ParseError : public Error {
 public:
  ParseError(ParseFailure reason, const std::string& message)
      : Error(ErrorCode::format, message), reason_(reason) {}

  ParseFailure reason() const noexcept { return reason_; }

 private:
  ParseFailure reason_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace edgeal
