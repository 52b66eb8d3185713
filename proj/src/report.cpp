// evb/report.cpp - verdicts and their JSON records
#include "evb/report.hpp"

#include "evb/printer.hpp"

namespace evb
{

Json state_to_json(const Model & m, const State & s)
{
  Json o = Json::object();
  for (size_t i = 0; i < s.size(); ++i) {
    const Type & t = m.types()[i];
    if (t.kind == TypeKind::Nat) {
      o[m.variables()[i]] = s[i];
    } else if (t.kind == TypeKind::Bool) {
      o[m.variables()[i]] = s[i] != 0;
    } else {
      o[m.variables()[i]] = m.format(static_cast<int>(i), s[i]);
    }
  }
  return o;
}

Json trace_to_json(const Model & m, const Trace & t)
{
  Json a = Json::array();
  Json first;
  first["step"] = 0;
  first["event"] = std::string(kInitialisation);
  first["kind"] = "init";
  first["state"] = state_to_json(m, t.initial);
  a.push_back(std::move(first));
  for (size_t i = 0; i < t.steps.size(); ++i) {
    Json rec;
    rec["step"] = i + 1;
    rec["event"] = t.steps[i].event;
    rec["kind"] = step_kind_name(t.steps[i].kind);
    rec["state"] = state_to_json(m, t.steps[i].post);
    a.push_back(std::move(rec));
  }
  return a;
}

CheckResult check_machine(const Project & p, const Model & m, Mode mode)
{
  CheckResult r;
  r.pos = report(p, m);
  r.reach = explore(m, mode);
  return r;
}

Json po_record(const Model & m, const ProofObligation & po)
{
  Json o;
  o["record"] = "obligation";
  o["id"] = po.id;
  o["kind"] = po_kind_name(po.kind);
  o["status"] = po_status_name(po.status);
  o["counterexample"] = po.counterexample ? state_to_json(m, *po.counterexample) : Json();
  return o;
}

Json po_summary(const PoReport & r)
{
  Json o;
  o["record"] = "obligations";
  o["machine"] = r.machine;
  o["total"] = r.total;
  o["discharged"] = r.discharged;
  o["failed"] = r.failed;
  o["vacuous"] = r.vacuous;
  o["millis"] = r.millis;
  o["bounded"] = true;
  return o;
}

Json reach_summary(const ReachReport & r)
{
  Json o;
  o["record"] = "reachability";
  o["machine"] = r.machine;
  o["mode"] = mode_name(r.mode);
  o["states"] = r.states;
  o["transitions"] = r.transitions;
  o["violations"] = r.violation_count;
  o["hazard_states"] = r.hazard_states;
  o["unanswered_states"] = r.unanswered_states;
  o["deadlock_states"] = r.deadlock_states;
  o["dropped"] = r.dropped;
  o["uncovered"] = r.events_uncovered();
  o["ok"] = r.ok();
  return o;
}

Json refinement_record(const Model & concrete, const RefinementFailure & f)
{
  Json o;
  o["record"] = "refinement-failure";
  o["check"] = refinement_check_name(f.check);
  o["event"] = f.event;
  o["labels"] = f.labels;
  o["witness"] = trace_to_json(concrete, f.witness);
  o["post"] = f.post ? state_to_json(concrete, *f.post) : Json();
  return o;
}

Json refinement_summary(const RefinementReport & r)
{
  Json o;
  o["record"] = "refinement";
  o["abstract"] = r.abstract_machine;
  o["concrete"] = r.concrete_machine;
  o["states"] = r.states;
  o["pairs"] = r.pairs;
  Json checks = Json::object();
  for (auto c : {RefinementCheck::AbstractInvariant, RefinementCheck::GuardStrengthening,
                 RefinementCheck::ActionSimulation, RefinementCheck::NewEventFrame}) {
    checks[refinement_check_name(c)] = r.count(c);
  }
  o["failures"] = checks;
  o["ok"] = r.ok();
  return o;
}

Json scenario_record(const ScenarioReport & r)
{
  Json o;
  o["record"] = "scenario";
  o["machine"] = r.machine;
  o["passed"] = r.passed;
  o["invalid"] = r.invalid;
  o["steps"] = r.steps_executed;
  o["failed_line"] = r.failed_line;
  o["reason"] = r.reason;
  if (r.model) {
    o["final"] = state_to_json(*r.model, r.final_state);
    o["trace"] = trace_to_json(*r.model, r.trace);
  }
  return o;
}

std::string action_text(const Assignment & a) { return a.variable + " := " + to_text(a.value); }

Json machine_descriptor(const Model & m)
{
  const FlatMachine & fm = m.machine();
  Json o;
  o["name"] = fm.name;
  o["refines"] = fm.abstract_machine ? Json(*fm.abstract_machine) : Json();
  o["sees"] = fm.sees;
  Json vars = Json::array();
  for (size_t i = 0; i < m.variables().size(); ++i) {
    const Bound b = m.range(static_cast<int>(i));
    vars.push_back({{"name", m.variables()[i]}, {"type", m.types()[i].to_string()}, {"range", {b.lo, b.hi}}});
  }
  o["variables"] = vars;
  Json invs = Json::array();
  for (const auto & inv : fm.invariants) invs.push_back({{"label", inv.label}, {"text", to_text(inv.body)}});
  o["invariants"] = invs;
  Json events = Json::array();
  for (const auto & e : fm.events) {
    Json ev;
    ev["name"] = e.name;
    ev["kind"] = e.is_environment() ? "environment" : "model";
    ev["refines"] = e.refines;
    Json guards = Json::array();
    for (const auto & g : e.guards) guards.push_back({{"label", g.label}, {"text", to_text(g.body)}});
    ev["guards"] = guards;
    Json acts = Json::array();
    for (const auto & a : e.actions) acts.push_back({{"label", a.label}, {"text", action_text(a)}});
    ev["actions"] = acts;
    events.push_back(std::move(ev));
  }
  o["events"] = events;
  return o;
}

}  // namespace evb
