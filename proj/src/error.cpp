#include "pattern_pilot/error.hpp"

namespace pilot {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::Schema: return "SCHEMA";
    case ErrorCode::Duplicate: return "DUPLICATE_EVENT";
    case ErrorCode::Ordering: return "ORDERING";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::Io: return "IO";
    case ErrorCode::Version: return "VERSION";
    case ErrorCode::Busy: return "BUSY";
  }
  return "UNKNOWN";
}

static std::string decorate(const std::string& message, const std::optional<std::size_t>& line) {
  if (!line) return message;
  return "line " + std::to_string(*line) + ": " + message;
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line,
             std::optional<std::string> field)
    : std::runtime_error(decorate(message, line)),
      code_(code),
      line_(line),
      field_(std::move(field)) {}

}  // namespace pilot
