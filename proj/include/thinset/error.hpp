#pragma once

#include <stdexcept>
#include <string>

namespace thinset {

// Every library failure derives from Error and carries a stable kind name
// that the CLI reports verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("DomainError", what) {}
};

class AliasError : public Error {
 public:
  explicit AliasError(const std::string& what) : Error("AliasError", what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what)
      : Error("PreconditionError", what) {}
};

class MeanNotZero : public Error {
 public:
  explicit MeanNotZero(const std::string& what) : Error("MeanNotZero", what) {}
};

class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what) : Error("Infeasible", what) {}
};

class CertificateFailure : public Error {
 public:
  explicit CertificateFailure(const std::string& what)
      : Error("CertificateFailure", what) {}
};

/// Raised when an enumeration budget runs out. `partial_lower_bound` is the
/// best bound established before stopping.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, double partial_lower_bound)
      : Error("CapExceeded", what), partial_(partial_lower_bound) {}

  double partial_lower_bound() const noexcept { return partial_; }

 private:
  double partial_;
};

/// The convex solver stalled before reaching the requested relative gap.
class ToleranceNotMet : public Error {
 public:
  ToleranceNotMet(const std::string& what, double primal, double dual)
      : Error("ToleranceNotMet", what), primal_(primal), dual_(dual) {}

  double primal() const noexcept { return primal_; }
  double dual() const noexcept { return dual_; }

 private:
  double primal_;
  double dual_;
};

}  // namespace thinset
