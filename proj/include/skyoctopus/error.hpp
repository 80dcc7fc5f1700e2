#pragma once

#include <stdexcept>
#include <string>

namespace skyoct {

enum class ErrorKind {
  kInput,
  kLoad,
  kCoverageGap,
  kRuleTable,
  kIncompleteMeasurement,
  kEstablishmentTimeout,
  kTeidMismatch,
  kInstanceTooLarge,
  kIo,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so that the C API can
// map it onto a stable status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace skyoct
