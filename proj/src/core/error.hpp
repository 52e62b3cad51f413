#ifndef TASKPLAN_CORE_ERROR_HPP
#define TASKPLAN_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace taskplan {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Validation,
  Io,
  State,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    case ErrorKind::State: return "state";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace taskplan

#endif
