#pragma once

#include <stdexcept>
#include <string>

namespace fwmnet {

/// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  config,         // bad user input: files, flags, field values
  topology,       // cascade wiring is not a valid DAG of cells
  lookup,         // unknown preset name
  validation,     // an input violates a numerical precondition
  inconsistency,  // an internal invariant does not hold
  domain,         // argument outside a function's domain
  conditioning,   // a matrix is too close to singular
  degenerate_phase,
  optimization,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define FWMNET_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

FWMNET_DEFINE_ERROR(ConfigError, config)
FWMNET_DEFINE_ERROR(TopologyError, topology)
FWMNET_DEFINE_ERROR(LookupError, lookup)
FWMNET_DEFINE_ERROR(ValidationError, validation)
FWMNET_DEFINE_ERROR(InconsistencyError, inconsistency)
FWMNET_DEFINE_ERROR(DomainError, domain)
FWMNET_DEFINE_ERROR(ConditioningError, conditioning)
FWMNET_DEFINE_ERROR(DegeneratePhaseError, degenerate_phase)
FWMNET_DEFINE_ERROR(OptimizationError, optimization)

#undef FWMNET_DEFINE_ERROR

}  // namespace fwmnet
