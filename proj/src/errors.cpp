#include "evb/errors.hpp"

namespace evb
{

const char * error_code_name(ErrorCode c)
{
  switch (c) {
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::CyclicExtension: return "CyclicExtension";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownMachine: return "UnknownMachine";
    case ErrorCode::UnknownEvent: return "UnknownEvent";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::MalformedDefinition: return "MalformedDefinition";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::NonFiniteCarrier: return "NonFiniteCarrier";
    case ErrorCode::AxiomViolation: return "AxiomViolation";
    case ErrorCode::MissingBound: return "MissingBound";
    case ErrorCode::InvalidBound: return "InvalidBound";
    case ErrorCode::GuardNotEnabled: return "GuardNotEnabled";
    case ErrorCode::WellDefinedness: return "WellDefinedness";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::ExplorationCapExceeded: return "ExplorationCapExceeded";
    case ErrorCode::NotSuperposition: return "NotSuperposition";
    case ErrorCode::ScenarioSyntax: return "ScenarioSyntax";
    case ErrorCode::ManifestSyntax: return "ManifestSyntax";
  }
  return "Error";
}

}  // namespace evb
