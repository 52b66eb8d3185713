// evb/printer.hpp - canonical text form of definitions and expressions
#pragma once

#include <string>

#include "evb/ast.hpp"

namespace evb
{

struct PrintOptions
{
  bool unicode = false;  // emit ∧ ∨ ⇒ ¬ ≠ ≤ ≥ ∈ ↦ → instead of ASCII
};

std::string to_text(const Expr & e, const PrintOptions & opts = {});
std::string to_text(const ExprPtr & e, const PrintOptions & opts = {});

// Pretty printing emits two-space indentation and declaration order. The ASCII
// output reparses to a structurally identical definition.
std::string pretty_print(const ContextDef & c, const PrintOptions & opts = {});
std::string pretty_print(const MachineDef & m, const PrintOptions & opts = {});
std::string pretty_print(const Unit & u, const PrintOptions & opts = {});

}  // namespace evb
