// evb/ast.hpp - abstract syntax for contexts, machines, events and expressions
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace evb
{

struct SourcePos
{
  int line = 1;
  int column = 1;

  friend bool operator==(const SourcePos &, const SourcePos &) = default;
  friend auto operator<=>(const SourcePos &, const SourcePos &) = default;
};

struct SourceSpan
{
  std::string file;
  SourcePos start;
  SourcePos end;

  std::string to_string() const;
};

enum class ExprKind {
  IntLit,
  BoolLit,
  Ident,
  Add,
  Sub,
  Mul,
  Div,
  Eq,
  Neq,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Implies,
  Not,
  SetLit,
  Maplet,
  Member,
  TotalFn,
  Partition,
  BoolSet,
  NatSet,
};

const char * expr_kind_name(ExprKind k);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// One recursive node type serves expressions and predicates. Children are
// shared and never mutated after construction.
struct Expr
{
  ExprKind kind;
  std::int64_t int_value = 0;  // IntLit value, BoolLit 0/1
  std::string name;            // Ident
  std::vector<ExprPtr> args;
  SourceSpan span;

  static ExprPtr make_int(std::int64_t v, SourceSpan span = {});
  static ExprPtr make_bool(bool v, SourceSpan span = {});
  static ExprPtr make_ident(std::string name, SourceSpan span = {});
  static ExprPtr make(ExprKind k, std::vector<ExprPtr> args, SourceSpan span = {});

  bool is_binary_arith() const;
  bool is_comparison() const;
};

// Structural equality ignores source spans.
bool structurally_equal(const Expr & a, const Expr & b);
bool structurally_equal(const ExprPtr & a, const ExprPtr & b);

// Identifiers that occur in the expression (variables and constants alike).
void collect_identifiers(const Expr & e, std::set<std::string> & out);
std::set<std::string> identifiers_of(const Expr & e);

// Capture-free substitution of identifiers (there are no binders).
ExprPtr substitute(const ExprPtr & e, const std::map<std::string, ExprPtr> & subst);

// Flattens nested conjunctions into their conjuncts.
void split_conjuncts(const ExprPtr & e, std::vector<ExprPtr> & out);
ExprPtr make_conjunction(const std::vector<ExprPtr> & parts);

// Walks e and calls f on every node, parents first.
template <typename F>
void visit_preorder(const Expr & e, F && f)
{
  f(e);
  for (const auto & a : e.args) {
    visit_preorder(*a, f);
  }
}

enum class PredicateKind { Typing, Technical, Property };

const char * predicate_kind_name(PredicateKind k);

// typ* -> typing, tec* -> technical, anything else -> property.
PredicateKind kind_from_label(const std::string & label);

struct LabeledPredicate
{
  std::string label;
  ExprPtr body;
  SourceSpan span;

  PredicateKind kind() const { return kind_from_label(label); }
};

struct Assignment
{
  std::string label;
  std::string variable;
  ExprPtr value;
  SourceSpan span;
};

enum class EventKind { Model, Environment };

inline constexpr const char * kInitialisation = "INITIALISATION";

struct EventDef
{
  std::string name;
  std::vector<std::string> refines;
  EventKind kind = EventKind::Model;
  bool convergent = false;
  std::vector<LabeledPredicate> guards;
  std::vector<Assignment> actions;
  SourceSpan span;

  bool is_initialisation() const { return name == kInitialisation; }
  bool is_environment() const { return kind == EventKind::Environment; }
  const Assignment * action_for(const std::string & variable) const;
  std::set<std::string> assigned_variables() const;
};

struct ContextDef
{
  std::string name;
  std::vector<std::string> extends;
  std::vector<std::string> sets;
  std::vector<std::string> constants;
  std::vector<LabeledPredicate> axioms;
  std::vector<LabeledPredicate> theorems;
  SourceSpan span;
};

struct MachineDef
{
  std::string name;
  std::optional<std::string> refines;
  std::vector<std::string> sees;
  std::vector<std::string> variables;
  std::vector<LabeledPredicate> invariants;
  std::vector<LabeledPredicate> theorems;
  ExprPtr variant;
  std::vector<EventDef> events;
  SourceSpan span;

  const EventDef * find_event(const std::string & name) const;
  const EventDef * initialisation() const { return find_event(kInitialisation); }
};

using Unit = std::variant<ContextDef, MachineDef>;

const std::string & unit_name(const Unit & u);

// Structural equality for whole definitions, ignoring spans. Used by the
// round-trip properties.
bool structurally_equal(const ContextDef & a, const ContextDef & b);
bool structurally_equal(const MachineDef & a, const MachineDef & b);
bool structurally_equal(const Unit & a, const Unit & b);

}  // namespace evb
