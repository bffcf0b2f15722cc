#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmv {

/// Failure categories surfaced to callers and written into report records.
enum class ErrorKind {
  InvalidArgument,
  NearSpectrum,
  NotConverged,
  NegativeDensity,
  MoebiusPole,
  WronskianDegenerate,
  MDenominatorDegenerate,
  PropagationOverflow,
  EdgeContact,
  ConfigSchema,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// what() without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cmv
