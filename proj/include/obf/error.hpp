#pragma once

#include <stdexcept>
#include <string>

namespace obf {

enum class ErrorKind {
  DegenerateData,
  ImproperPrior,
  EmptyClass,
  BadSize,
  TooLarge,
  InvalidLoss,
  NotPD,
  ConfigInvalid,
  Parse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::ImproperPrior: return "ImproperPrior";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::BadSize: return "BadSize";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::InvalidLoss: return "InvalidLoss";
    case ErrorKind::NotPD: return "NotPD";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

// Single exception type for the toolkit; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace obf
