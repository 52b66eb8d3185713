// evb/checker.cpp - explicit-state reachability, deadlock and refinement checks
#include "evb/checker.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>


#include "evb/errors.hpp"
#include "evb/report.hpp"

namespace evb
{

const char * mode_name(Mode m) { return m == Mode::Closed ? "closed" : "driven"; }

std::optional<Mode> parse_mode(const std::string & s)
{
  if (s == "closed") return Mode::Closed;
  if (s == "driven") return Mode::Driven;
  return std::nullopt;
}

const char * step_kind_name(StepKind k)
{
  switch (k) {
    case StepKind::Model: return "model";
    case StepKind::Environment: return "environment";
    case StepKind::Perturb: return "perturb";
  }
  return "?";
}

const char * refinement_check_name(RefinementCheck c)
{
  switch (c) {
    case RefinementCheck::AbstractInvariant: return "abstract-invariant";
    case RefinementCheck::GuardStrengthening: return "guard-strengthening";
    case RefinementCheck::ActionSimulation: return "action-simulation";
    case RefinementCheck::NewEventFrame: return "new-event-frame";
  }
  return "?";
}

std::vector<std::string> ReachReport::events_covered() const
{
  std::vector<std::string> out;
  for (const auto & [e, n] : coverage) {
    if (n > 0) out.push_back(e);
  }
  return out;
}

std::vector<std::string> ReachReport::events_uncovered() const
{
  std::vector<std::string> out;
  for (const auto & [e, n] : coverage) {
    if (n == 0) out.push_back(e);
  }
  return out;
}

bool ReachReport::ok() const
{
  if (violation_count > 0 || unanswered() > 0) return false;
  return mode == Mode::Closed || deadlock_states == 0;
}

std::size_t RefinementReport::count(RefinementCheck c) const
{
  return static_cast<std::size_t>(
    std::count_if(failures.begin(), failures.end(), [&](const RefinementFailure & f) { return f.check == c; }));
}

namespace
{

struct StateHash
{
  std::size_t operator()(const State & s) const noexcept
  {
    std::uint64_t h = 1469598103934665603ULL;
    for (Value v : s) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// Visited states with BFS parent links.
class Graph
{
public:
  explicit Graph(const Model & m) : m_(m) {}

  std::size_t size() const { return states_.size(); }
  const State & state(int id) const { return states_[static_cast<size_t>(id)]; }

  // Returns the id and whether the state is new.
  std::pair<int, bool> add(const State & s, int parent, int event)
  {
    auto [it, fresh] = index_.emplace(s, static_cast<int>(states_.size()));
    if (!fresh) return {it->second, false};
    if (states_.size() >= m_.config().max_states) {
      throw ModelError(ErrorCode::ExplorationCapExceeded,
                       m_.name() + ": more than " + std::to_string(m_.config().max_states) + " states");
    }
    states_.push_back(s);
    parent_.push_back(parent);
    event_.push_back(event);
    return {it->second, true};
  }

  Trace trace(int id) const
  {
    std::vector<int> path;
    for (int at = id; at >= 0; at = parent_[static_cast<size_t>(at)]) path.push_back(at);
    std::reverse(path.begin(), path.end());
    Trace t;
    t.initial = states_[static_cast<size_t>(path.front())];
    for (size_t i = 1; i < path.size(); ++i) {
      const auto & ev = m_.events()[static_cast<size_t>(event_[static_cast<size_t>(path[i])])];
      t.steps.push_back({ev.name, ev.environment ? StepKind::Environment : StepKind::Model,
                         states_[static_cast<size_t>(path[i])]});
    }
    return t;
  }

  Trace extend(int id, const CompiledEvent & ev, const State & post) const
  {
    Trace t = trace(id);
    t.steps.push_back({ev.name, ev.environment ? StepKind::Environment : StepKind::Model, post});
    return t;
  }

private:
  const Model & m_;
  std::vector<State> states_;
  std::vector<int> parent_;
  std::vector<int> event_;
  std::unordered_map<State, int, StateHash> index_;
};

std::vector<int> mode_events(const Model & m, Mode mode)
{
  std::vector<int> out;
  for (size_t i = 0; i < m.events().size(); ++i) {
    if (mode == Mode::Driven || !m.events()[i].environment) out.push_back(static_cast<int>(i));
  }
  return out;
}

void warn_once(std::vector<std::string> & warnings, std::set<std::string> & seen, const std::string & w)
{
  if (seen.insert(w).second) warnings.push_back(w);
}

State initial_or_throw(const Model & m)
{
  State s0 = m.initial_state();
  if (!m.in_bounds(s0)) {
    throw ModelError(ErrorCode::OutOfBounds, m.name() + ": initial state " + m.describe(s0) + " outside the bounds");
  }
  return s0;
}

}  // namespace

ReachReport explore(const Model & m, const ExploreOptions & opt)
{
  ReachReport r;
  r.machine = m.name();
  r.mode = opt.mode;
  const auto events = mode_events(m, opt.mode);
  for (int e : events) r.coverage[m.events()[static_cast<size_t>(e)].name] = 0;
  std::set<std::string> seen_warnings;

  Graph g(m);
  std::vector<char> bad;
  const State s0 = initial_or_throw(m);
  g.add(s0, -1, -1);
  {
    auto v = m.violated_invariants(s0);
    bad.push_back(!v.empty());
    if (!v.empty()) {
      ++r.violation_count;
      r.violations.push_back({std::move(v), g.trace(0)});
      if (opt.stop_at_first_violation) {
        r.exhausted = false;
        r.states = 1;
        return r;
      }
    }
  }

  // Whether `t` violates an invariant that holds in `s`.
  auto breaks_new = [&](const State & s, const State & t) {
    for (const auto & inv : m.invariants()) {
      if (!inv.code.holds(t.data()) && inv.code.holds(s.data())) return true;
    }
    return false;
  };
  // Bad states entered by an environment step that broke an invariant,
  // with that step's origin.
  std::vector<int> env_from{-1};
  std::vector<int> env_event{-1};
  std::vector<char> answered;

  for (size_t head = 0; head < g.size(); ++head) {
    const int id = static_cast<int>(head);
    const State s = g.state(id);
    bool any_enabled = false;
    bool good_reply = false;
    for (int ei : events) {
      const auto & ev = m.events()[static_cast<size_t>(ei)];
      std::vector<WdFailure> wd;
      const bool en = m.enabled(ev, s, nullptr, &wd);
      for (const auto & w : wd) warn_once(r.warnings, seen_warnings, ev.name + ": guard not well defined: " + w.message());
      if (!en) continue;
      any_enabled = true;

      State t;
      try {
        t = m.apply(ev, s);
      } catch (const ModelError & e) {
        ++r.violation_count;
        if (r.violations.size() < opt.max_traces) r.violations.push_back({{e.what()}, g.trace(id)});
        continue;
      }
      ++r.transitions;
      ++r.coverage[ev.name];
      if (!m.in_bounds(t)) {
        ++r.dropped;
        warn_once(r.warnings, seen_warnings, ev.name + ": post-state outside the bounds dropped");
        continue;
      }
      auto [nid, fresh] = g.add(t, id, ei);
      std::vector<std::string> broken;
      if (fresh) {
        broken = m.violated_invariants(t);
        bad.push_back(!broken.empty());
        env_from.push_back(-1);
        env_event.push_back(-1);
      }
      const auto n = static_cast<size_t>(nid);
      const bool tbad = bad[n] != 0;
      if (ev.environment) {
        if (tbad && env_from[n] < 0 && breaks_new(s, t)) {
          env_from[n] = id;
          env_event[n] = ei;
        }
        continue;
      }
      if (!tbad) good_reply = true;
      if (tbad && !bad[head]) {
        ++r.violation_count;
        if (r.violations.size() < opt.max_traces) {
          if (!fresh) broken = m.violated_invariants(t);
          r.violations.push_back({broken, g.extend(id, ev, t)});
        }
        if (opt.stop_at_first_violation) {
          r.states = g.size();
          r.exhausted = false;
          return r;
        }
      }
    }
    answered.push_back(good_reply);
    if (!any_enabled) {
      ++r.deadlock_states;
      if (r.deadlocks.size() < opt.max_traces) r.deadlocks.push_back(g.trace(id));
    }
  }

  // Response discipline. Unanswered hazards are listed ahead of samples of
  // answered ones.
  std::vector<Hazard> samples;
  for (size_t i = 0; i < g.size(); ++i) {
    if (env_from[i] < 0) continue;
    ++r.hazard_states;
    const bool ok = answered[i] != 0;
    if (!ok) ++r.unanswered_states;
    auto & list = ok ? samples : r.hazards;
    if (list.size() >= opt.max_traces) continue;
    const auto & ev = m.events()[static_cast<size_t>(env_event[i])];
    list.push_back({m.violated_invariants(g.state(static_cast<int>(i))),
                    g.extend(env_from[i], ev, g.state(static_cast<int>(i))), ok});
  }
  for (auto & h : samples) r.hazards.push_back(std::move(h));
  r.states = g.size();
  return r;
}

ReachReport explore(const Model & m, Mode mode)
{
  ExploreOptions opt;
  opt.mode = mode;
  return explore(m, opt);
}

std::optional<Violation> check_invariants(const Model & m, Mode mode)
{
  ExploreOptions opt;
  opt.mode = mode;
  opt.stop_at_first_violation = true;
  auto r = explore(m, opt);
  if (r.violations.empty()) return std::nullopt;
  return r.violations.front();
}

std::map<std::string, std::size_t> coverage(const Model & m, Mode mode) { return explore(m, mode).coverage; }

// ---- refinement ----------------------------------------------------------

namespace
{

struct AbstractView
{
  std::vector<CompiledPredicate> invariants;
  std::map<std::string, CompiledEvent> events;
  CompiledEvent init;
  std::vector<int> slots;  // abstract variables in the concrete state
};

AbstractView compile_abstract(const FlatMachine & a, const Model & c)
{
  const auto & cm = c.machine();
  if (!cm.abstract_machine || *cm.abstract_machine != a.name) {
    throw ModelError(ErrorCode::NotSuperposition, cm.name + " does not refine " + a.name);
  }
  AbstractView v;
  for (const auto & var : a.variables) {
    const int s = c.slot(var);
    if (s < 0) throw ModelError(ErrorCode::NotSuperposition, cm.name + " drops abstract variable " + var);
    v.slots.push_back(s);
  }
  for (const auto & inv : a.invariants) v.invariants.push_back({inv.label, inv.body, c.compile_predicate(inv.body)});
  for (const auto & e : a.events) {
    if (e.is_initialisation()) {
      v.init = c.compile_event(e);
    } else {
      v.events.emplace(e.name, c.compile_event(e));
    }
  }
  return v;
}

std::vector<std::string> differing(const Model & c, const AbstractView & v, const State & x, const State & y)
{
  std::vector<std::string> out;
  for (int s : v.slots) {
    if (x[static_cast<size_t>(s)] != y[static_cast<size_t>(s)]) out.push_back(c.variables()[static_cast<size_t>(s)]);
  }
  return out;
}

// Keeps the first (shortest) witness per check, event and labels.
class Failures
{
public:
  void add(RefinementFailure f)
  {
    std::string key = std::string(refinement_check_name(f.check)) + "|" + f.event;
    for (const auto & l : f.labels) key += "|" + l;
    if (seen_.insert(key).second) list_.push_back(std::move(f));
  }

  std::vector<RefinementFailure> take() { return std::move(list_); }

private:
  std::set<std::string> seen_;
  std::vector<RefinementFailure> list_;
};

}  // namespace

RefinementReport check_refinement(const FlatMachine & abstract, const Model & c)
{
  const AbstractView av = compile_abstract(abstract, c);
  RefinementReport r;
  r.abstract_machine = abstract.name;
  r.concrete_machine = c.name();
  Failures failures;

  Graph g(c);
  const State s0 = initial_or_throw(c);
  g.add(s0, -1, -1);
  {
    // The abstract initialisation must produce the projected initial state.
    State empty(c.variables().size(), 0);
    const State a0 = c.apply(av.init, empty);
    auto diff = differing(c, av, a0, s0);
    if (!diff.empty()) {
      failures.add({RefinementCheck::ActionSimulation, std::string(kInitialisation), diff, Trace{s0, {}}, s0});
    }
  }

  const auto events = mode_events(c, Mode::Closed);
  for (size_t head = 0; head < g.size(); ++head) {
    const int id = static_cast<int>(head);
    const State s = g.state(id);

    std::vector<std::string> broken;
    for (const auto & inv : av.invariants) {
      if (!inv.code.holds(s.data())) broken.push_back(inv.label);
    }
    if (!broken.empty()) failures.add({RefinementCheck::AbstractInvariant, {}, broken, g.trace(id), std::nullopt});

    for (int ei : events) {
      const auto & ev = c.events()[static_cast<size_t>(ei)];
      if (!c.enabled(ev, s)) continue;
      State t;
      try {
        t = c.apply(ev, s);
      } catch (const ModelError &) {
        continue;  // reported by explore
      }
      ++r.pairs;

      const auto & targets = ev.def->refines;
      const CompiledEvent * ae = nullptr;
      for (const auto & name : targets) {
        if (auto it = av.events.find(name); it != av.events.end()) {
          ae = &it->second;
          break;
        }
      }
      if (!targets.empty() && ae && !ae->environment) {
        std::vector<std::string> failing;
        if (!c.enabled(*ae, s, &failing)) {
          failures.add({RefinementCheck::GuardStrengthening, ev.name, failing, g.trace(id), t});
        } else {
          try {
            auto diff = differing(c, av, c.apply(*ae, s), t);
            if (!diff.empty()) failures.add({RefinementCheck::ActionSimulation, ev.name, diff, g.trace(id), t});
          } catch (const ModelError & e) {
            failures.add({RefinementCheck::ActionSimulation, ev.name, {e.what()}, g.trace(id), t});
          }
        }
      } else if (targets.empty()) {
        auto diff = differing(c, av, s, t);
        if (!diff.empty()) failures.add({RefinementCheck::NewEventFrame, ev.name, diff, g.trace(id), t});
      }
      if (c.in_bounds(t)) g.add(t, id, ei);
    }
  }
  r.states = g.size();
  r.failures = failures.take();
  return r;
}

// ---- traces --------------------------------------------------------------

bool replay(const Model & m, const Trace & t, std::string * why)
{
  auto fail = [&](const std::string & msg) {
    if (why) *why = msg;
    return false;
  };
  if (t.initial != m.initial_state()) return fail("initial state differs");
  State s = t.initial;
  for (size_t i = 0; i < t.steps.size(); ++i) {
    const Step & st = t.steps[i];
    if (st.kind != StepKind::Perturb) {
      const CompiledEvent * ev = m.find_event(st.event);
      if (!ev) return fail("step " + std::to_string(i + 1) + ": unknown event " + st.event);
      if (ev->environment != (st.kind == StepKind::Environment)) {
        return fail("step " + std::to_string(i + 1) + ": wrong kind for " + st.event);
      }
      if (!m.enabled(*ev, s)) return fail("step " + std::to_string(i + 1) + ": " + st.event + " not enabled");
      if (m.apply(*ev, s) != st.post) return fail("step " + std::to_string(i + 1) + ": " + st.event + " post-state differs");
    }
    s = st.post;
  }
  return true;
}

std::string trace_to_jsonl(const Model & m, const Trace & t)
{
  std::string out;
  for (const auto & rec : trace_to_json(m, t)) out += rec.dump() + '\n';
  return out;
}

}  // namespace evb
