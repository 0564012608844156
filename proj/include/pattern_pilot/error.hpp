#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pilot {

enum class ErrorCode {
  Parse,      // malformed input (JSON syntax)
  Schema,     // well-formed input missing or mistyping a field
  Duplicate,  // (case_id, seq) already present
  Ordering,   // violates per-case total order or context homogeneity
  Domain,     // precondition on an argument failed
  NotFound,
  Io,
  Version,    // persisted file has an unsupported schema version
  Busy,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt,
        std::optional<std::string> field = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& line() const noexcept { return line_; }
  const std::optional<std::string>& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::optional<std::string> field_;
};

}  // namespace pilot
