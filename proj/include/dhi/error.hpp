#pragma once

#include <stdexcept>
#include <string>

namespace dhi {

enum class ErrorKind {
  InvalidInput,
  InvalidModulus,
  InvalidDistribution,
  ResourceLimit,
  InvalidConfig,
  Io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::InvalidModulus: return "invalid modulus";
    case ErrorKind::InvalidDistribution: return "invalid distribution";
    case ErrorKind::ResourceLimit: return "resource limit";
    case ErrorKind::InvalidConfig: return "invalid config";
    case ErrorKind::Io: return "i/o failure";
  }
  return "error";
}

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dhi
