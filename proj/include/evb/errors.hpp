// evb/errors.hpp - error kinds raised by the kernel
#pragma once

#include <stdexcept>
#include <string>

namespace evb
{

enum class ErrorCode {
  UnresolvedReference,
  CyclicExtension,
  DuplicateName,
  UnknownMachine,
  UnknownEvent,
  UnknownVariable,
  MalformedDefinition,
  TypeError,
  NonFiniteCarrier,
  AxiomViolation,
  MissingBound,
  InvalidBound,
  GuardNotEnabled,
  WellDefinedness,
  TypeMismatch,
  OutOfBounds,
  EmptyHistory,
  ExplorationCapExceeded,
  NotSuperposition,
  ScenarioSyntax,
  ManifestSyntax,
};

const char * error_code_name(ErrorCode c);

class ModelError : public std::runtime_error
{
public:
  ModelError(ErrorCode code, const std::string & message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace evb
