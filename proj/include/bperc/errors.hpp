#pragma once

#include <stdexcept>
#include <string>

namespace bperc {

enum class ErrorCode {
  domain = 1,
  io,
  config,
  threshold_not_reached,
  insufficient_data,
  fit_failure,
  out_of_range,
  undefined_ratio,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Configuration problems carry the offending field and, when known, the
// 1-based line in the source file.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& message);

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace bperc
