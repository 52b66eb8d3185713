// evb/parser.hpp - textual front end for .ebs model files
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "evb/ast.hpp"

namespace evb
{

struct ParseError
{
  SourceSpan span;
  std::string expected;
  std::string found;

  std::string message() const;
};

struct ParseResult
{
  std::vector<Unit> units;
  std::vector<ParseError> errors;

  bool ok() const { return errors.empty(); }
};

/// Parses every CONTEXT/MACHINE block in `text`. After an error the parser
/// skips to the next top-level block so one call can report several errors;
/// units that failed to parse are not returned.
ParseResult parse_source(std::string_view text, const std::string & file = "<input>");

/// Parses one standalone predicate or expression (used by scenarios and the
/// service). Errors are returned through `errors`.
ExprPtr parse_expression(
  std::string_view text, std::vector<ParseError> & errors, const std::string & file = "<expr>");

/// Throws ModelError(MalformedDefinition) carrying the first error message.
std::vector<Unit> parse_or_throw(std::string_view text, const std::string & file = "<input>");

}  // namespace evb
