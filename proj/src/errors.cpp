#include "bperc/errors.hpp"

namespace bperc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain_error";
    case ErrorCode::io: return "io_error";
    case ErrorCode::config: return "config_error";
    case ErrorCode::threshold_not_reached: return "THRESHOLD_NOT_REACHED";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::fit_failure: return "fit_failure";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::undefined_ratio: return "undefined_ratio";
  }
  return "unknown_error";
}

namespace {
std::string describe(const std::string& field, int line, const std::string& message) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!field.empty()) out += "field '" + field + "': ";
  return out + message;
}
}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : Error(ErrorCode::config, describe(field, line, message)), field_(std::move(field)), line_(line) {}

}  // namespace bperc
