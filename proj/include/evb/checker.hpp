// evb/checker.hpp - explicit-state reachability, deadlock and refinement checks
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evb/semantics.hpp"

namespace evb
{

// Closed mode fires model events only; driven mode adds environment events.
enum class Mode { Closed, Driven };

const char * mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string & s);

enum class StepKind { Model, Environment, Perturb };

const char * step_kind_name(StepKind k);

struct Step
{
  std::string event;  // for a perturbation, the variable
  StepKind kind = StepKind::Model;
  State post;
};

struct Trace
{
  State initial;
  std::vector<Step> steps;

  const State & last() const { return steps.empty() ? initial : steps.back().post; }
  std::size_t size() const { return steps.size(); }
};

struct Violation
{
  std::vector<std::string> invariants;
  Trace trace;
};

// A state entered by an environment step that falsified an invariant (the
// trace ends with that step). `answered`
// holds when some enabled model event leads to a state satisfying every
// invariant.
struct Hazard
{
  std::vector<std::string> invariants;
  Trace trace;
  bool answered = false;
};

struct ReachReport
{
  std::string machine;
  Mode mode = Mode::Closed;
  std::size_t states = 0;
  std::size_t transitions = 0;
  bool exhausted = true;
  std::map<std::string, std::size_t> coverage;  // every event of the mode, fired count
  std::vector<Violation> violations;
  std::size_t violation_count = 0;  // good-to-bad model steps
  std::vector<Hazard> hazards;
  std::size_t hazard_states = 0;
  std::size_t unanswered_states = 0;
  std::vector<Trace> deadlocks;
  std::size_t deadlock_states = 0;
  std::size_t dropped = 0;  // post-states outside the configured bounds
  std::vector<std::string> warnings;

  std::size_t unanswered() const { return unanswered_states; }
  std::vector<std::string> events_covered() const;
  std::vector<std::string> events_uncovered() const;
  /// Violations and unanswered hazards fail in both modes; deadlocks only
  /// fail in driven mode.
  bool ok() const;
};

struct ExploreOptions
{
  Mode mode = Mode::Closed;
  bool stop_at_first_violation = false;
  std::size_t max_traces = 16;  // per category; counts stay exact
};

/// Breadth-first search from the initial state. Event order is declaration
/// order. Throws ExplorationCapExceeded past config().max_states states.
ReachReport explore(const Model & m, const ExploreOptions & opt);
ReachReport explore(const Model & m, Mode mode);

/// Shortest trace to a state violating an invariant, if any.
std::optional<Violation> check_invariants(const Model & m, Mode mode);

std::map<std::string, std::size_t> coverage(const Model & m, Mode mode);

enum class RefinementCheck { AbstractInvariant, GuardStrengthening, ActionSimulation, NewEventFrame };

const char * refinement_check_name(RefinementCheck c);

struct RefinementFailure
{
  RefinementCheck check = RefinementCheck::AbstractInvariant;
  std::string event;                 // concrete event, empty for (a)
  std::vector<std::string> labels;   // invariants, guards or variables
  Trace witness;                     // ends in the offending pre-state
  std::optional<State> post;         // concrete post-state for (c) and (d)
};

struct RefinementReport
{
  std::string abstract_machine;
  std::string concrete_machine;
  std::size_t states = 0;
  std::size_t pairs = 0;  // (state, event) pairs examined
  std::vector<RefinementFailure> failures;

  bool ok() const { return failures.empty(); }
  std::size_t count(RefinementCheck c) const;
};

/// Superposition refinement over the closed-mode reachable states of the
/// concrete model. Throws NotSuperposition unless the concrete machine
/// directly refines `abstract` and keeps all of its variables.
RefinementReport check_refinement(const FlatMachine & abstract, const Model & concrete);

/// Replays a trace and checks every step was enabled and produced the
/// recorded state. Perturbation steps are taken as given.
bool replay(const Model & m, const Trace & t, std::string * why = nullptr);

/// One JSON object per line: step, event, kind, state.
std::string trace_to_jsonl(const Model & m, const Trace & t);

}  // namespace evb
