#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace itq3 {

enum class ErrorKind {
  Length,      // vector length violates a power-of-two / multiple-of-8 rule
  Domain,      // non-finite or out-of-range value
  Size,        // operation scope exceeded (dense oracle)
  Shape,       // dimension mismatch between operands
  Corruption,  // decoded payload is not a valid encoding
  BadMagic,
  UnsupportedVersion,
  Truncated,
  SizeMismatch,
  Io,
  Usage,
};

// Stable identifier printed by the CLI, e.g. "E_TRUNCATED".
constexpr std::string_view error_id(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Length: return "E_LENGTH";
  case ErrorKind::Domain: return "E_DOMAIN";
  case ErrorKind::Size: return "E_SIZE";
  case ErrorKind::Shape: return "E_SHAPE";
  case ErrorKind::Corruption: return "E_CORRUPT";
  case ErrorKind::BadMagic: return "E_BAD_MAGIC";
  case ErrorKind::UnsupportedVersion: return "E_UNSUPPORTED_VERSION";
  case ErrorKind::Truncated: return "E_TRUNCATED";
  case ErrorKind::SizeMismatch: return "E_SIZE_MISMATCH";
  case ErrorKind::Io: return "E_IO";
  case ErrorKind::Usage: return "E_USAGE";
  }
  return "E_UNKNOWN";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view id() const noexcept { return error_id(kind_); }

private:
  ErrorKind kind_;
};

} // namespace itq3
