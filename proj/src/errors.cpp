#include "nld/errors.hpp"

#include <utility>

namespace nld {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain_error: return "domain-error";
    case ErrorKind::resource_limit: return "resource-limit";
    case ErrorKind::contract_violation: return "contract-violation";
    case ErrorKind::precondition_failure: return "precondition-failure";
    case ErrorKind::property_failure: return "property-failure";
    case ErrorKind::theorem_violation: return "theorem-violation";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::degenerate_fit: return "degenerate-fit";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

PropertyFailure::PropertyFailure(const std::string& what, Eigen::VectorXd witness)
    : Error(ErrorKind::property_failure, what), witness_(std::move(witness)) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace nld
