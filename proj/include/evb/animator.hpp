// evb/animator.hpp - interactive sessions and scripted scenarios
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evb/checker.hpp"

namespace evb
{

struct HistoryEntry
{
  Step step;
  State pre;
};

struct EventStatus
{
  std::string name;
  bool environment = false;
  bool enabled = false;
  std::vector<std::string> failing_guards;
};

// One animation of a model. Not thread-safe; callers serialize access.
class Session
{
public:
  explicit Session(std::shared_ptr<const Model> model);

  const Model & model() const { return *model_; }
  std::shared_ptr<const Model> model_ptr() const { return model_; }
  const State & state() const { return state_; }
  const std::vector<HistoryEntry> & history() const { return history_; }
  /// Labels of the invariants false in the current state.
  const std::vector<std::string> & hazards() const { return hazards_; }

  std::vector<EventStatus> events() const;
  std::vector<std::string> enabled_events() const;

  /// Throws UnknownEvent, GuardNotEnabled, WellDefinedness or OutOfBounds.
  void fire(const std::string & event);
  /// Direct assignment of a value written in model syntax. Throws
  /// UnknownVariable, TypeMismatch or OutOfBounds.
  void perturb(const std::string & variable, const std::string & value);
  /// Throws EmptyHistory.
  void undo();

  Trace trace() const;

private:
  void refresh();

  std::shared_ptr<const Model> model_;
  State state_;
  std::vector<HistoryEntry> history_;
  std::vector<std::string> hazards_;
};

struct ScenarioStep
{
  enum class Kind { Fire, Perturb, Assert, ExpectEnabled, ExpectDisabled };

  Kind kind = Kind::Fire;
  std::string target;  // event or variable
  std::string text;    // perturbation value or predicate
  int repeat = 1;
  int line = 0;
};

struct Scenario
{
  std::string file;
  std::string machine;
  std::map<std::string, Bound> bounds;
  std::map<std::string, std::string> constants;
  std::optional<std::size_t> cap;
  std::vector<ScenarioStep> steps;
};

/// Throws ModelError(ScenarioSyntax) with the offending line.
Scenario parse_scenario(const std::string & text, const std::string & file = "<scenario>");

struct ScenarioReport
{
  std::string machine;
  bool passed = false;
  bool invalid = false;  // could not run as written: unknown names, ill-typed assertion
  std::size_t steps_executed = 0;  // after expanding repetitions
  int failed_line = 0;
  std::string reason;
  State final_state;
  Trace trace;
  std::shared_ptr<const Model> model;  // null when the machine failed to build
};

/// Runs the steps in order and stops at the first failure. Failures,
/// including unknown machines or ill-typed assertions, are reported in the
/// result rather than thrown.
ScenarioReport run_scenario(const Scenario & sc, const Project & p, const CheckConfig & base);

}  // namespace evb
