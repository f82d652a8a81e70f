#pragma once

#include <stdexcept>
#include <string>

namespace reg {

// Broad failure categories. They map one-to-one onto the C API status codes.
enum class ErrorKind {
  kInvalidArgument,
  kParse,
  kValidation,
  kProtocol,
  kNotFound,
  kRuntime,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace reg
