#pragma once

#include <stdexcept>
#include <string>

namespace erakit {

/// Failure classes, each mapped to one CLI exit code.
enum class ErrorKind {
  kUsage,             // bad flags or configuration (exit 2)
  kData,              // decode, parse or validation failure (exit 3)
  kInsufficientData,  // too few rows/frames for the requested statistic (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::kData, what) {}
};

struct InsufficientData : Error {
  explicit InsufficientData(const std::string& what) : Error(ErrorKind::kInsufficientData, what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return 2;
    case ErrorKind::kData: return 3;
    case ErrorKind::kInsufficientData: return 4;
  }
  return 1;
}

}  // namespace erakit
