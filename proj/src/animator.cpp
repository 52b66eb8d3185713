// evb/animator.cpp - interactive sessions and scripted scenarios
#include "evb/animator.hpp"

#include <sstream>

#include "evb/errors.hpp"
#include "evb/parser.hpp"

namespace evb
{

Session::Session(std::shared_ptr<const Model> model) : model_(std::move(model))
{
  state_ = model_->initial_state();
  refresh();
}

void Session::refresh() { hazards_ = model_->violated_invariants(state_); }

std::vector<EventStatus> Session::events() const
{
  std::vector<EventStatus> out;
  for (const auto & e : model_->events()) {
    EventStatus st;
    st.name = e.name;
    st.environment = e.environment;
    st.enabled = model_->enabled(e, state_, &st.failing_guards);
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<std::string> Session::enabled_events() const { return model_->enabled_events(state_); }

void Session::fire(const std::string & event)
{
  const CompiledEvent * e = model_->find_event(event);
  if (!e || e->def->is_initialisation()) throw ModelError(ErrorCode::UnknownEvent, event);
  State next = model_->fire(*e, state_);
  if (!model_->in_bounds(next)) {
    throw ModelError(ErrorCode::OutOfBounds, event + " leads to " + model_->describe(next));
  }
  history_.push_back({{event, e->environment ? StepKind::Environment : StepKind::Model, next}, state_});
  state_ = std::move(next);
  refresh();
}

void Session::perturb(const std::string & variable, const std::string & value)
{
  const Value v = model_->parse_value(variable, value, state_);
  State next = state_;
  next[static_cast<size_t>(model_->slot(variable))] = v;
  history_.push_back({{variable, StepKind::Perturb, next}, state_});
  state_ = std::move(next);
  refresh();
}

void Session::undo()
{
  if (history_.empty()) throw ModelError(ErrorCode::EmptyHistory, "nothing to undo");
  state_ = history_.back().pre;
  history_.pop_back();
  refresh();
}

Trace Session::trace() const
{
  Trace t;
  t.initial = history_.empty() ? state_ : history_.front().pre;
  for (const auto & h : history_) t.steps.push_back(h.step);
  return t;
}

// ---- scenarios -----------------------------------------------------------

namespace
{

[[noreturn]] void syntax(const std::string & file, int line, const std::string & msg)
{
  throw ModelError(ErrorCode::ScenarioSyntax, file + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_int(const std::string & s, long long & out)
{
  if (s.empty()) return false;
  try {
    size_t used = 0;
    out = std::stoll(s, &used);
    return used == s.size();
  } catch (const std::exception &) {
    return false;
  }
}

}  // namespace

Scenario parse_scenario(const std::string & text, const std::string & file)
{
  Scenario sc;
  sc.file = file;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string l = trim(raw);
    if (l.empty()) continue;
    std::istringstream words(l);
    std::string key;
    words >> key;
    std::string rest;
    std::getline(words, rest);
    rest = trim(rest);
    std::vector<std::string> args;
    {
      std::istringstream ws(rest);
      for (std::string w; ws >> w;) args.push_back(w);
    }

    if (key == "machine") {
      if (args.size() != 1) syntax(file, line, "expected: machine <name>");
      if (!sc.machine.empty()) syntax(file, line, "machine given twice");
      sc.machine = args[0];
    } else if (key == "const") {
      if (args.size() != 2) syntax(file, line, "expected: const <name> <value>");
      sc.constants[args[0]] = args[1];
    } else if (key == "bound") {
      long long lo = 0;
      long long hi = 0;
      if (args.size() != 3 || !parse_int(args[1], lo) || !parse_int(args[2], hi)) {
        syntax(file, line, "expected: bound <var> <lo> <hi>");
      }
      sc.bounds[args[0]] = {lo, hi};
    } else if (key == "cap") {
      long long n = 0;
      if (args.size() != 1 || !parse_int(args[0], n) || n <= 0) syntax(file, line, "expected: cap <positive count>");
      sc.cap = static_cast<std::size_t>(n);
    } else if (key == "fire") {
      ScenarioStep st;
      st.kind = ScenarioStep::Kind::Fire;
      st.line = line;
      if (args.empty() || args.size() > 2) syntax(file, line, "expected: fire <event> [xN]");
      st.target = args[0];
      if (args.size() == 2) {
        long long n = 0;
        if (args[1].size() < 2 || args[1][0] != 'x' || !parse_int(args[1].substr(1), n) || n <= 0) {
          syntax(file, line, "repetition must be xN with N > 0");
        }
        st.repeat = static_cast<int>(n);
      }
      sc.steps.push_back(st);
    } else if (key == "perturb") {
      if (args.size() < 2) syntax(file, line, "expected: perturb <var> <value>");
      ScenarioStep st;
      st.kind = ScenarioStep::Kind::Perturb;
      st.line = line;
      st.target = args[0];
      st.text = trim(rest.substr(rest.find(args[0]) + args[0].size()));
      sc.steps.push_back(st);
    } else if (key == "assert") {
      if (rest.empty()) syntax(file, line, "expected: assert <predicate>");
      ScenarioStep st;
      st.kind = ScenarioStep::Kind::Assert;
      st.line = line;
      st.text = rest;
      sc.steps.push_back(st);
    } else if (key == "expect_enabled" || key == "expect_disabled") {
      if (args.size() != 1) syntax(file, line, "expected: " + key + " <event>");
      ScenarioStep st;
      st.kind = key == "expect_enabled" ? ScenarioStep::Kind::ExpectEnabled : ScenarioStep::Kind::ExpectDisabled;
      st.line = line;
      st.target = args[0];
      sc.steps.push_back(st);
    } else {
      syntax(file, line, "unknown directive '" + key + "'");
    }
  }
  if (sc.machine.empty()) syntax(file, line, "missing 'machine' line");
  return sc;
}

namespace
{

// Names used by the steps must exist before anything runs.
std::string validate(const Scenario & sc, const Model & m, int & line)
{
  for (const auto & st : sc.steps) {
    line = st.line;
    switch (st.kind) {
      case ScenarioStep::Kind::Fire:
      case ScenarioStep::Kind::ExpectEnabled:
      case ScenarioStep::Kind::ExpectDisabled:
        if (m.event_index(st.target) < 0) return "unknown event " + st.target;
        break;
      case ScenarioStep::Kind::Perturb:
        if (m.slot(st.target) < 0) return "unknown variable " + st.target;
        break;
      case ScenarioStep::Kind::Assert: break;
    }
  }
  line = 0;
  return {};
}

std::string failing_text(const std::vector<std::string> & guards)
{
  std::string s;
  for (const auto & g : guards) s += (s.empty() ? "" : ", ") + g;
  return s;
}

}  // namespace

ScenarioReport run_scenario(const Scenario & sc, const Project & p, const CheckConfig & base)
{
  ScenarioReport r;
  r.machine = sc.machine;
  CheckConfig cfg = base;
  for (const auto & [k, v] : sc.bounds) cfg.bounds[k] = v;
  for (const auto & [k, v] : sc.constants) cfg.constants[k] = v;
  if (sc.cap) cfg.max_states = *sc.cap;

  try {
    r.model = Model::build(p, sc.machine, cfg);
  } catch (const ModelError & e) {
    r.invalid = true;
    r.reason = e.what();
    return r;
  }
  if (auto why = validate(sc, *r.model, r.failed_line); !why.empty()) {
    r.invalid = true;
    r.reason = why;
    return r;
  }

  std::optional<Session> session;
  try {
    session.emplace(r.model);
  } catch (const ModelError & e) {
    r.invalid = true;
    r.reason = e.what();
    return r;
  }
  Session & s = *session;
  auto finish = [&](int line, std::string why) {
    r.failed_line = line;
    r.reason = std::move(why);
    r.passed = r.reason.empty();
    r.final_state = s.state();
    r.trace = s.trace();
    return r;
  };

  for (const auto & st : sc.steps) {
    switch (st.kind) {
      case ScenarioStep::Kind::Fire:
        for (int i = 0; i < st.repeat; ++i) {
          const CompiledEvent & e = r.model->events()[static_cast<size_t>(r.model->event_index(st.target))];
          std::vector<std::string> failing;
          if (!r.model->enabled(e, s.state(), &failing)) {
            std::string why = st.target + " not enabled (" + failing_text(failing) + ")";
            if (st.repeat > 1) why += " at repetition " + std::to_string(i + 1);
            return finish(st.line, why);
          }
          try {
            s.fire(st.target);
          } catch (const ModelError & ex) {
            return finish(st.line, ex.what());
          }
          ++r.steps_executed;
        }
        break;
      case ScenarioStep::Kind::Perturb:
        try {
          s.perturb(st.target, st.text);
        } catch (const ModelError & ex) {
          return finish(st.line, ex.what());
        }
        ++r.steps_executed;
        break;
      case ScenarioStep::Kind::Assert: {
        std::vector<ParseError> errors;
        auto e = parse_expression(st.text, errors, sc.file);
        if (!errors.empty()) {
          r.invalid = true;
          return finish(st.line, errors.front().message());
        }
        Compiled pred;
        try {
          pred = r.model->compile_predicate(e);
        } catch (const ModelError & ex) {
          r.invalid = true;
          return finish(st.line, ex.what());
        }
        if (!pred.holds(s.state().data())) {
          return finish(st.line, "assertion failed: " + st.text + " in " + r.model->describe(s.state()));
        }
        ++r.steps_executed;
        break;
      }
      case ScenarioStep::Kind::ExpectEnabled:
      case ScenarioStep::Kind::ExpectDisabled: {
        const CompiledEvent & e = r.model->events()[static_cast<size_t>(r.model->event_index(st.target))];
        std::vector<std::string> failing;
        const bool en = r.model->enabled(e, s.state(), &failing);
        const bool want = st.kind == ScenarioStep::Kind::ExpectEnabled;
        if (en != want) {
          return finish(st.line, st.target + (want ? " is disabled (" + failing_text(failing) + ")" : " is enabled"));
        }
        ++r.steps_executed;
        break;
      }
    }
  }
  return finish(0, {});
}

}  // namespace evb
