#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace octgeom {

enum class ErrorCode {
  invalid_parameter,
  parse_error,
  wrong_dimension,
  empty_geometry,
  degenerate_face,
  point_outside_domain,
  face_outside_domain,
  capacity_exceeded,
  max_level_exceeded,
  io_error,
  config_error,
  validation_failure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::wrong_dimension: return "wrong-dimension";
    case ErrorCode::empty_geometry: return "empty-geometry";
    case ErrorCode::degenerate_face: return "degenerate-face";
    case ErrorCode::point_outside_domain: return "point-outside-domain";
    case ErrorCode::face_outside_domain: return "face-outside-domain";
    case ErrorCode::capacity_exceeded: return "capacity-exceeded";
    case ErrorCode::max_level_exceeded: return "max-level-exceeded";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::validation_failure: return "validation-failure";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto a process exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

/// Process exit status for an error code: 2 config, 3 parse, 4 capacity,
/// 5 validation failure, 6 io.
constexpr int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::degenerate_face: return 3;
    case ErrorCode::capacity_exceeded: return 4;
    case ErrorCode::validation_failure: return 5;
    case ErrorCode::io_error: return 6;
    default: return 2;
  }
}

}  // namespace octgeom
