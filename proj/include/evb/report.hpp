// evb/report.hpp - verdicts and their JSON records, shared by the CLI and the service
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "evb/animator.hpp"
#include "evb/checker.hpp"
#include "evb/obligations.hpp"

namespace evb
{

using Json = nlohmann::ordered_json;

/// NAT values as numbers, BOOL as booleans, everything else as model text.
Json state_to_json(const Model & m, const State & s);
/// The records of trace_to_jsonl as an array.
Json trace_to_json(const Model & m, const Trace & t);

/// Obligations and reachability of one machine in one mode.
struct CheckResult
{
  PoReport pos;
  ReachReport reach;

  std::size_t failures() const { return pos.failed + reach.violation_count + reach.unanswered_states +
                                        (reach.mode == Mode::Driven ? reach.deadlock_states : 0); }
  bool ok() const { return pos.failed == 0 && reach.ok(); }
};

CheckResult check_machine(const Project & p, const Model & m, Mode mode);

Json po_record(const Model & m, const ProofObligation & po);
Json po_summary(const PoReport & r);
Json reach_summary(const ReachReport & r);
Json refinement_record(const Model & concrete, const RefinementFailure & f);
Json refinement_summary(const RefinementReport & r);
Json scenario_record(const ScenarioReport & r);

/// Variables with types, invariants and events with guards and actions as text.
Json machine_descriptor(const Model & m);

std::string action_text(const Assignment & a);

}  // namespace evb
