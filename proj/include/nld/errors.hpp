#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace nld {

enum class ErrorKind {
  invalid_argument,
  domain_error,
  resource_limit,
  contract_violation,
  precondition_failure,
  property_failure,
  theorem_violation,
  numerical_failure,
  degenerate_fit,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the CLI in particular) can branch on category instead of text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A randomized inequality check that found a counterexample.
class PropertyFailure : public Error {
 public:
  PropertyFailure(const std::string& what, Eigen::VectorXd witness);

  const Eigen::VectorXd& witness() const noexcept { return witness_; }

 private:
  Eigen::VectorXd witness_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace nld
