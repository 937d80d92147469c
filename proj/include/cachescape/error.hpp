#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cachescape {

// Every failure raised by the library derives from Error. The CLI maps the
// concrete type to its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or profile; the message names the offending field.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input text. line() is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason, const std::string& source = {})
      : Error(format(line, reason, source)), line_(line), reason_(reason) {}

  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  static std::string format(std::size_t line, const std::string& reason,
                            const std::string& source) {
    std::string where = source;
    if (line != 0) where += (where.empty() ? "line " : ":") + std::to_string(line);
    return where.empty() ? reason : where + ": " + reason;
  }

  std::size_t line_;
  std::string reason_;
};

// A required table row is absent.
class LookupError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (thread count mismatch,
// multi-thread trace passed to the single-thread simulator, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cachescape
