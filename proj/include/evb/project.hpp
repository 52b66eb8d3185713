// evb/project.hpp - resolution of EXTENDS/SEES/REFINES links and flattening
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evb/ast.hpp"

namespace evb
{

struct ContextAxiom
{
  LabeledPredicate pred;
  std::string origin;  // context that declared it
  // A partition of a carrier set that a descendant context re-partitions
  // with additional elements. It stays in the list but is not evaluated.
  bool superseded = false;
};

struct Declared
{
  std::string name;
  std::string origin;
};

// A context with everything it (transitively) extends merged in. For a
// machine, the merge of every context it sees.
struct FlatContext
{
  std::string name;
  std::vector<std::string> ancestors;  // base contexts first, self last
  std::vector<Declared> sets;
  std::vector<Declared> constants;
  std::vector<ContextAxiom> axioms;
  std::vector<ContextAxiom> theorems;

  bool has_set(const std::string & n) const;
  bool has_constant(const std::string & n) const;
  std::vector<const ContextAxiom *> active_axioms() const;
};

struct AxiomClasses
{
  std::vector<std::string> typing;
  std::vector<std::string> technical;
  std::vector<std::string> property;
};

AxiomClasses classify_axioms(const FlatContext & c);

// Superposition view of a machine: every ancestor's variables, invariants
// and events merged with the machine's own.
struct FlatMachine
{
  std::string name;
  std::optional<std::string> abstract_machine;
  std::vector<std::string> chain;  // most abstract first, self last
  std::vector<std::string> sees;
  FlatContext context;
  std::vector<std::string> variables;
  std::vector<LabeledPredicate> invariants;
  std::map<std::string, std::string> invariant_origin;  // label -> machine
  std::vector<LabeledPredicate> theorems;
  ExprPtr variant;
  // Refining events list their abstract counterparts in `refines`.
  std::vector<EventDef> events;

  const EventDef * find_event(const std::string & n) const;
  const EventDef & initialisation() const;
  bool has_variable(const std::string & v) const;
  std::vector<const EventDef *> model_events() const;
  std::vector<const EventDef *> environment_events() const;
};

class Project
{
public:
  /// Validates and links raw definitions. Throws ModelError with
  /// UnresolvedReference, CyclicExtension, DuplicateName or
  /// MalformedDefinition.
  static Project resolve(std::vector<Unit> defs);

  const std::vector<Unit> & units() const { return units_; }
  const ContextDef * raw_context(const std::string & name) const;
  const MachineDef * raw_machine(const std::string & name) const;

  const FlatContext & context(const std::string & name) const;
  const FlatMachine & machine(const std::string & name) const;
  bool has_machine(const std::string & name) const { return machines_.count(name) > 0; }

  std::vector<std::string> context_names() const;
  std::vector<std::string> machine_names() const;  // declaration order
  const std::map<std::string, std::string> & refinement_edges() const { return edges_; }

private:
  std::vector<Unit> units_;
  std::map<std::string, FlatContext> contexts_;
  std::map<std::string, FlatMachine> machines_;
  std::map<std::string, std::string> edges_;
};

/// Throws ModelError(UnknownMachine).
const FlatMachine & flatten_machine(const Project & p, const std::string & machine);

/// A standalone definition equivalent to the flattened machine (no REFINES,
/// SEES every context the machine sees).
MachineDef to_machine_def(const FlatMachine & m);

/// Raw definitions compared structurally, plus the refinement edges.
bool structurally_equal(const Project & a, const Project & b);

}  // namespace evb
