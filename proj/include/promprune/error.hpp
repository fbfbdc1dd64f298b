#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace promprune {

enum class ErrorKind {
  invalid_input,
  degenerate_input,
  invalid_budget,
  instance_too_large,
  bad_magic,
  truncated,
  trailing_bytes,
  non_finite,
  io,
  parse,
};

// Stable machine-readable name, printed by the CLI on failure.
constexpr std::string_view category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::degenerate_input: return "degenerate_input";
    case ErrorKind::invalid_budget: return "invalid_budget";
    case ErrorKind::instance_too_large: return "instance_too_large";
    case ErrorKind::bad_magic: return "bad_magic";
    case ErrorKind::truncated: return "truncated";
    case ErrorKind::trailing_bytes: return "trailing_bytes";
    case ErrorKind::non_finite: return "non_finite";
    case ErrorKind::io: return "io_error";
    case ErrorKind::parse: return "parse_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace promprune
