#ifndef PARSKIT_ERRORS_HPP
#define PARSKIT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace parskit {

/// Base for all library errors. `code()` is a stable machine-readable tag
/// ("DistributionSum", "TargetNotNormalForm", ...) used in reports and tests.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Malformed input document (bad JSON, bad rational literal, schema breach).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A structurally well-formed system that breaks a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An operation refused its input (unknown state, reducible target,
/// nonempty frontier, missing valuation, ...). Maps to CLI exit code 3.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace parskit

#endif
