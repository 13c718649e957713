#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowhub {

/// Stable, machine-readable failure categories. The string form (see
/// to_string) is what the HTTP API puts in the `code` field of error bodies.
enum class ErrorCode {
  invalid_argument,
  parse_error,
  schema_error,
  size_limit,
  not_a_workflow,
  not_found,
  invalid_structure,
  crate_build_error,
  not_a_crate,
  invalid_crate,
  fetch_error,
  ref_not_found,
  registration_rejected,
  validation_failed,
  unauthenticated,
  access_denied,
  forbidden,
  frozen_version,
  unknown_version,
  attribution_cycle,
  visibility_required,
  mint_failed,
  bad_query,
  duplicate_item,
  integrity_error,
  conflict,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure carrying a human-oriented location ("line 3, column 7",
/// "steps/4", byte offsets...).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string location)
      : Error(ErrorCode::parse_error,
              location.empty() ? message : message + " (at " + location + ")"),
        location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace flowhub
