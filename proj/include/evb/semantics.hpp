// evb/semantics.hpp - typing, evaluation and event execution
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evb/ast.hpp"
#include "evb/project.hpp"

namespace evb
{

enum class TypeKind { Bool, Nat, Enum, Function };

struct Type
{
  TypeKind kind = TypeKind::Bool;
  std::string carrier;  // Enum: the set; Function: the domain set
  // Function range, either Bool or Enum over range_carrier.
  TypeKind range_kind = TypeKind::Bool;
  std::string range_carrier;

  static Type boolean() { return {}; }
  static Type nat() { return {TypeKind::Nat, {}, TypeKind::Bool, {}}; }
  static Type enumeration(std::string set) { return {TypeKind::Enum, std::move(set), TypeKind::Bool, {}}; }
  static Type function(std::string domain, const Type & range);

  Type range() const;
  std::string to_string() const;
  bool operator==(const Type & o) const;
  bool operator!=(const Type & o) const { return !(*this == o); }
};

// Every value is an integer: booleans are 0/1, enum elements their index in
// the carrier, functions a mixed-radix code (digit i is the image of
// domain element i).
using Value = std::int64_t;
using State = std::vector<Value>;

enum class WdReason { DivisionByZero, NaturalUnderflow, FunctionOutsideDomain };

const char * wd_reason_name(WdReason r);

struct WdFailure
{
  SourceSpan location;
  WdReason reason = WdReason::DivisionByZero;

  std::string message() const;
};

struct Bound
{
  Value lo = 0;
  Value hi = 0;
};

struct CheckConfig
{
  std::map<std::string, Bound> bounds;          // NAT variables
  std::map<std::string, std::string> constants;  // numeric or element name
  std::size_t max_states = 1'000'000;
};

struct Carrier
{
  std::string name;
  std::vector<std::string> elements;
};

struct ConstantValue
{
  Type type;
  Value value = 0;
};

// Carrier sets and the constant valuation of one flattened context.
class Universe
{
public:
  /// Throws TypeError, NonFiniteCarrier or AxiomViolation.
  static Universe build(const FlatContext & ctx, const CheckConfig & cfg);

  const Carrier * carrier(const std::string & name) const;
  const Carrier & finite_carrier(const std::string & name) const;  // throws NonFiniteCarrier
  bool is_set(const std::string & name) const;
  const ConstantValue * constant(const std::string & name) const;
  const std::map<std::string, ConstantValue> & constants() const { return constants_; }

  /// Number of values of a type; Nat has no finite size and returns 0.
  Value cardinality(const Type & t) const;
  std::string format(const Type & t, Value v) const;
  /// Index of an enum element within `set`, or -1.
  int element_index(const std::string & set, const std::string & element) const;

private:
  std::map<std::string, Carrier> carriers_;
  std::map<std::string, bool> declared_sets_;
  std::map<std::string, ConstantValue> constants_;
};

class Model;

// An expression compiled against one model: identifiers resolved to state
// slots or folded constants.
class Compiled
{
public:
  enum class Op {
    Lit, Var, Add, Sub, Mul, Div, Eq, Neq, Lt, Le, Gt, Ge, And, Or, Implies, Not,
    MapLit, MemberAll, MemberList, FnRange, Partition,
  };

  struct Node
  {
    Op op = Op::Lit;
    Value imm = 0;
    Value aux = 0;
    std::vector<int> kids;
    std::vector<Value> set;
    const Expr * src = nullptr;
  };

  /// False on a well-definedness failure, described in `wd` when given.
  bool eval(const Value * state, Value & out, WdFailure * wd = nullptr) const;
  /// Predicate evaluation with WD failures counted as false.
  bool holds(const Value * state) const;
  bool empty() const { return nodes_.empty(); }
  const ExprPtr & source() const { return source_; }
  /// State slots read by the expression.
  const std::vector<int> & slots() const { return slots_; }

private:
  friend class Compiler;
  bool eval_node(int n, const Value * s, Value & out, WdFailure * wd) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  ExprPtr source_;
  std::vector<int> slots_;
};

struct CompiledPredicate
{
  std::string label;
  ExprPtr body;
  Compiled code;
};

struct CompiledAction
{
  std::string label;
  std::string variable;
  int slot = -1;
  Compiled code;
};

struct CompiledEvent
{
  const EventDef * def = nullptr;
  std::string name;
  bool environment = false;
  std::vector<CompiledPredicate> guards;
  std::vector<CompiledAction> actions;
};

/// Variable types from the typing invariants (v : BOOL | NAT | S | A --> B).
/// Throws TypeError or NonFiniteCarrier.
std::map<std::string, Type> infer_types(const FlatMachine & m, const Universe & u);

/// True for invariants of the form `v : T` on a machine variable.
bool is_typing_invariant(const LabeledPredicate & p, const FlatMachine & m);

// A flattened machine with its universe, variable types and compiled
// invariants and events. Immutable once built.
class Model
{
public:
  /// Throws ModelError (UnknownMachine, TypeError, MissingBound, ...).
  static std::shared_ptr<const Model> build(
    const Project & p, const std::string & machine, const CheckConfig & cfg);
  static std::shared_ptr<const Model> build(
    const FlatMachine & m, const CheckConfig & cfg);

  const FlatMachine & machine() const { return machine_; }
  const std::string & name() const { return machine_.name; }
  const Universe & universe() const { return universe_; }
  const CheckConfig & config() const { return config_; }

  const std::vector<std::string> & variables() const { return variables_; }
  const std::vector<Type> & types() const { return types_; }
  int slot(const std::string & variable) const;
  /// Enumeration range of a slot: bounds for NAT, 0..n-1 otherwise.
  Bound range(int slot) const;
  bool in_bounds(const State & s) const;

  const std::vector<CompiledPredicate> & invariants() const { return invariants_; }
  const std::vector<CompiledEvent> & events() const { return events_; }  // INITIALISATION excluded
  const CompiledEvent & initialisation() const { return init_; }
  /// Index into events(), or -1.
  int event_index(const std::string & name) const;
  const CompiledEvent * find_event(const std::string & name) const;

  Compiled compile_predicate(const ExprPtr & e) const;
  Compiled compile_value(const ExprPtr & e, const Type & expected) const;
  CompiledEvent compile_event(const EventDef & e) const;

  /// Fires INITIALISATION from the empty valuation.
  State initial_state() const;
  /// Guards in order; labels of false guards go to `failing`, WD failures
  /// disable the event and go to `warnings`.
  bool enabled(const CompiledEvent & e, const State & s, std::vector<std::string> * failing = nullptr,
               std::vector<WdFailure> * warnings = nullptr) const;
  std::vector<std::string> enabled_events(const State & s, std::vector<WdFailure> * warnings = nullptr) const;
  /// Simultaneous assignment. Throws ModelError(WellDefinedness).
  State apply(const CompiledEvent & e, const State & s) const;
  /// Throws GuardNotEnabled when a guard is false.
  State fire(const CompiledEvent & e, const State & s) const;
  State fire(const std::string & event, const State & s) const;

  std::vector<std::string> violated_invariants(const State & s) const;

  std::string format(int slot, Value v) const;
  std::string describe(const State & s) const;
  /// Parses and evaluates `text` as a value for `variable` in state `s`.
  /// Throws UnknownVariable, TypeMismatch or OutOfBounds.
  Value parse_value(const std::string & variable, const std::string & text, const State & s) const;

private:
  Model(FlatMachine m, Universe u, CheckConfig cfg);

  FlatMachine machine_;
  Universe universe_;
  CheckConfig config_;
  std::vector<std::string> variables_;
  std::vector<Type> types_;
  std::map<std::string, int> slots_;
  std::vector<Bound> ranges_;
  std::vector<CompiledPredicate> invariants_;
  std::vector<CompiledEvent> events_;
  CompiledEvent init_;
};

/// Function code helpers.
Value function_image(Value code, int index, Value range_size);
Value function_with(Value code, int index, Value image, Value range_size);

}  // namespace evb
