// tests/oracle.hpp - random small machines and a brute-force reference evaluator
//
// Nothing here calls the kernel's compiler, solver or explorer. Machines are
// generated as text for the kernel and as plain trees for the reference,
// which enumerates the whole product domain.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "evb/ast.hpp"

namespace oracle
{

using Value = std::int64_t;
using Lookup = std::function<std::optional<Value>(int)>;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node
{
  enum Kind { Int, Var, True, False, Add, Sub, Mul, Div, Eq, Neq, Lt, Le, Gt, Ge, And, Or, Implies, Not } kind;
  Value value = 0;
  int var = -1;
  std::vector<NodePtr> kids;
};

// Undefined (division by zero, natural underflow) is nullopt. Connectives
// are well-defined left to right.
inline std::optional<Value> eval(const Node & n, const Lookup & look)
{
  auto k = [&](int i) { return eval(*n.kids[static_cast<size_t>(i)], look); };
  switch (n.kind) {
    case Node::Int: return n.value;
    case Node::Var: return look(n.var);
    case Node::True: return 1;
    case Node::False: return 0;
    case Node::Not: {
      auto a = k(0);
      if (!a) return std::nullopt;
      return *a ? 0 : 1;
    }
    case Node::And: {
      auto a = k(0);
      if (!a) return std::nullopt;
      if (!*a) return 0;
      auto b = k(1);
      if (!b) return std::nullopt;
      return *b ? 1 : 0;
    }
    case Node::Or: {
      auto a = k(0);
      if (!a) return std::nullopt;
      if (*a) return 1;
      auto b = k(1);
      if (!b) return std::nullopt;
      return *b ? 1 : 0;
    }
    case Node::Implies: {
      auto a = k(0);
      if (!a) return std::nullopt;
      if (!*a) return 1;
      auto b = k(1);
      if (!b) return std::nullopt;
      return *b ? 1 : 0;
    }
    default: break;
  }
  auto a = k(0);
  if (!a) return std::nullopt;
  auto b = k(1);
  if (!b) return std::nullopt;
  switch (n.kind) {
    case Node::Add: return *a + *b;
    case Node::Sub: return *a < *b ? std::nullopt : std::optional<Value>(*a - *b);
    case Node::Mul: return *a * *b;
    case Node::Div: return *b == 0 ? std::nullopt : std::optional<Value>(*a / *b);
    case Node::Eq: return *a == *b;
    case Node::Neq: return *a != *b;
    case Node::Lt: return *a < *b;
    case Node::Le: return *a <= *b;
    case Node::Gt: return *a > *b;
    case Node::Ge: return *a >= *b;
    default: return std::nullopt;
  }
}

inline bool holds(const Node & n, const Lookup & look)
{
  auto v = eval(n, look);
  return v && *v != 0;
}

struct Var
{
  std::string name;
  bool boolean = false;
  Value hi = 1;  // domain is 0..hi
};

struct Action
{
  int var;
  NodePtr value;
};

struct Event
{
  std::string name;
  bool environment = false;
  std::vector<NodePtr> guards;
  std::vector<Action> actions;
};

struct Machine
{
  std::string name;
  std::vector<Var> vars;                                  // declaration order
  std::vector<std::pair<std::string, NodePtr>> invariants;  // non-typing ones
  std::vector<Value> init;
  std::vector<Event> events;                               // INITIALISATION excluded

  std::string text() const;
};

inline std::string text(const Node & n, const Machine & m)
{
  auto bin = [&](const char * op) {
    return "(" + text(*n.kids[0], m) + op + text(*n.kids[1], m) + ")";
  };
  switch (n.kind) {
    case Node::Int: return std::to_string(n.value);
    case Node::Var: return m.vars[static_cast<size_t>(n.var)].name;
    case Node::True: return "TRUE";
    case Node::False: return "FALSE";
    case Node::Add: return bin(" + ");
    case Node::Sub: return bin(" - ");
    case Node::Mul: return bin(" * ");
    case Node::Div: return bin(" / ");
    case Node::Eq: return bin(" = ");
    case Node::Neq: return bin(" /= ");
    case Node::Lt: return bin(" < ");
    case Node::Le: return bin(" <= ");
    case Node::Gt: return bin(" > ");
    case Node::Ge: return bin(" >= ");
    case Node::And: return bin(" & ");
    case Node::Or: return bin(" or ");
    case Node::Implies: return bin(" => ");
    case Node::Not: return "not " + text(*n.kids[0], m);
  }
  return "?";
}

inline std::string Machine::text() const
{
  std::string s = "MACHINE\n  " + name + "\nVARIABLES\n  ";
  for (size_t i = 0; i < vars.size(); ++i) s += (i ? ", " : "") + vars[i].name;
  s += "\nINVARIANTS\n";
  int label = 1;
  for (const auto & v : vars) {
    s += "  typ" + std::to_string(label++) + " " + v.name + (v.boolean ? " : BOOL\n" : " : NAT\n");
  }
  for (const auto & [l, p] : invariants) s += "  " + l + " " + oracle::text(*p, *this) + "\n";
  s += "EVENTS\n  Event INITIALISATION\n    Then\n";
  for (size_t i = 0; i < vars.size(); ++i) {
    const std::string v = vars[i].boolean ? (init[i] ? "TRUE" : "FALSE") : std::to_string(init[i]);
    s += "      act" + std::to_string(i + 1) + " " + vars[i].name + " := " + v + "\n";
  }
  s += "  End\n";
  for (const auto & e : events) {
    s += std::string("  Event ") + (e.environment ? "environment " : "") + e.name + "\n";
    if (!e.guards.empty()) {
      s += "    Where\n";
      for (size_t g = 0; g < e.guards.size(); ++g) {
        s += "      grd" + std::to_string(g + 1) + " " + oracle::text(*e.guards[g], *this) + "\n";
      }
    }
    s += "    Then\n";
    for (size_t a = 0; a < e.actions.size(); ++a) {
      const auto & act = e.actions[a];
      s += "      act" + std::to_string(a + 1) + " " + vars[static_cast<size_t>(act.var)].name + " := " +
           oracle::text(*act.value, *this) + "\n";
    }
    s += "  End\n";
  }
  return s + "END\n";
}

inline NodePtr lit(Value v) { return std::make_shared<const Node>(Node{Node::Int, v, -1, {}}); }
inline NodePtr var(int i) { return std::make_shared<const Node>(Node{Node::Var, 0, i, {}}); }
inline NodePtr op(Node::Kind k, NodePtr a, NodePtr b) { return std::make_shared<const Node>(Node{k, 0, -1, {a, b}}); }
inline NodePtr negate(NodePtr a) { return std::make_shared<const Node>(Node{Node::Not, 0, -1, {a}}); }

// ---- generator ---------------------------------------------------------------

class Generator
{
public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  // One machine per generator.

  Machine machine(const std::string & name)
  {
    Machine m;
    m.name = name;
    m.vars = {{"x", false, pick(1, 4)}, {"y", false, pick(1, 4)}, {"b", true, 1}};
    std::shuffle(m.vars.begin(), m.vars.end(), rng_);
    for (size_t i = 0; i < m.vars.size(); ++i) {
      if (m.vars[i].boolean) bool_ = static_cast<int>(i);
      else nats_.push_back(static_cast<int>(i));
    }
    const int ninv = pick(1, 2);
    for (int i = 0; i < ninv; ++i) m.invariants.emplace_back("inv" + std::to_string(i + 1), predicate());
    for (const auto & v : m.vars) m.init.push_back(pick(0, v.hi));
    const int nmodel = pick(1, 3);
    const int nenv = pick(0, 2);
    for (int i = 0; i < nmodel + nenv; ++i) {
      Event e;
      e.environment = i >= nmodel;
      e.name = (e.environment ? "env" : "evt") + std::to_string(e.environment ? i - nmodel + 1 : i + 1);
      const int ng = pick(0, 2);
      for (int g = 0; g < ng; ++g) e.guards.push_back(predicate());
      std::vector<int> order{0, 1, 2};
      std::shuffle(order.begin(), order.end(), rng_);
      const int na = pick(1, 2);
      for (int a = 0; a < na; ++a) {
        const int v = order[static_cast<size_t>(a)];
        e.actions.push_back({v, m.vars[static_cast<size_t>(v)].boolean ? boolean_literal() : int_expr(1)});
      }
      m.events.push_back(std::move(e));
    }
    return m;
  }

private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  static NodePtr make(Node::Kind k, std::vector<NodePtr> kids = {}, Value v = 0, int var = -1)
  {
    return std::make_shared<const Node>(Node{k, v, var, std::move(kids)});
  }

  NodePtr boolean_literal() { return make(pick(0, 1) ? Node::True : Node::False); }

  NodePtr int_expr(int depth)
  {
    const int r = pick(0, depth > 0 ? 5 : 1);
    if (r == 0) return make(Node::Int, {}, pick(0, 3));
    if (r == 1) return make(Node::Var, {}, 0, nats_[static_cast<size_t>(pick(0, 1))]);
    static const Node::Kind ops[] = {Node::Add, Node::Sub, Node::Mul, Node::Div};
    return make(ops[pick(0, 3)], {int_expr(0), int_expr(0)});
  }

  NodePtr atom()
  {
    if (pick(0, 3) == 0) return make(Node::Eq, {make(Node::Var, {}, 0, bool_), boolean_literal()});
    static const Node::Kind cmp[] = {Node::Eq, Node::Neq, Node::Lt, Node::Le, Node::Gt, Node::Ge};
    return make(cmp[pick(0, 5)], {int_expr(1), int_expr(1)});
  }

  NodePtr predicate()
  {
    switch (pick(0, 4)) {
      case 0: return atom();
      case 1: return make(Node::Not, {atom()});
      case 2: return make(Node::And, {atom(), atom()});
      case 3: return make(Node::Or, {atom(), atom()});
      default: return make(Node::Implies, {atom(), atom()});
    }
  }

  std::mt19937_64 rng_;
  std::vector<int> nats_;
  int bool_ = -1;
};

// ---- reference evaluation -------------------------------------------------------

using State = std::vector<Value>;

inline Lookup reader(const State & s)
{
  return [&s](int v) -> std::optional<Value> { return s[static_cast<size_t>(v)]; };
}

inline bool in_domain(const Machine & m, const State & s)
{
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] > m.vars[i].hi) return false;
  }
  return true;
}

inline bool good(const Machine & m, const State & s)
{
  for (const auto & [l, p] : m.invariants) {
    if (!holds(*p, reader(s))) return false;
  }
  return true;
}

inline bool enabled(const Event & e, const State & s)
{
  for (const auto & g : e.guards) {
    if (!holds(*g, reader(s))) return false;
  }
  return true;
}

inline std::optional<State> post(const Event & e, const State & s)
{
  State t = s;
  for (const auto & a : e.actions) {
    auto v = eval(*a.value, reader(s));
    if (!v) return std::nullopt;
    t[static_cast<size_t>(a.var)] = *v;
  }
  return t;
}

// Every state of the product domain, first variable most significant.
template <typename F>
void for_each_state(const Machine & m, F && f)
{
  State s(m.vars.size(), 0);
  while (true) {
    if (f(static_cast<const State &>(s))) return;
    size_t i = s.size();
    while (i > 0) {
      --i;
      if (s[i] < m.vars[i].hi) {
        ++s[i];
        break;
      }
      s[i] = 0;
      if (i == 0) return;
    }
    if (s.empty()) return;
  }
}

struct Reach
{
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t dropped = 0;
  std::size_t violations = 0;
  std::size_t deadlocks = 0;
  std::size_t hazards = 0;
  std::size_t unanswered = 0;
  std::map<std::string, std::size_t> coverage;
  std::map<State, std::size_t> depth;
  bool action_undefined = false;
  std::optional<std::size_t> shortest_violation;  // steps, for a good-to-bad model step
};

inline Reach explore(const Machine & m, bool driven)
{
  Reach r;
  for (const auto & e : m.events) {
    if (driven || !e.environment) r.coverage[e.name] = 0;
  }
  std::vector<State> queue{m.init};
  r.depth[m.init] = 0;
  if (!good(m, m.init)) {
    ++r.violations;
    r.shortest_violation = 0;
  }
  std::set<State> hazard;
  std::set<State> answered;
  for (size_t head = 0; head < queue.size(); ++head) {
    const State s = queue[head];
    bool any = false;
    for (const auto & e : m.events) {
      if (e.environment && !driven) continue;
      if (!enabled(e, s)) continue;
      any = true;
      auto t = post(e, s);
      if (!t) {
        ++r.violations;
        r.action_undefined = true;
        continue;
      }
      ++r.transitions;
      ++r.coverage[e.name];
      if (!in_domain(m, *t)) {
        ++r.dropped;
        continue;
      }
      if (!r.depth.count(*t)) {
        r.depth[*t] = r.depth[s] + 1;
        queue.push_back(*t);
      }
      const bool tbad = !good(m, *t);
      if (e.environment) {
        bool breaks = false;
        for (const auto & [l, p] : m.invariants) {
          if (!holds(*p, reader(*t)) && holds(*p, reader(s))) breaks = true;
        }
        if (tbad && breaks) hazard.insert(*t);
        continue;
      }
      if (!tbad) answered.insert(s);
      if (tbad && good(m, s)) {
        ++r.violations;
        if (!r.shortest_violation) r.shortest_violation = r.depth[s] + 1;
      }
    }
    if (!any) ++r.deadlocks;
  }
  r.states = queue.size();
  r.hazards = hazard.size();
  for (const auto & h : hazard) r.unanswered += answered.count(h) ? 0 : 1;
  return r;
}

enum class Status { Discharged, Failed, Vacuous };

struct Obligation
{
  Status status = Status::Discharged;
  std::optional<State> counterexample;
};

// Invariant preservation for every event (INITIALISATION first) and every
// invariant mentioning an assigned variable. The goal reads assigned
// variables through their new values, which is substitution.
inline std::map<std::pair<std::string, std::string>, Obligation> inv_obligations(const Machine & m)
{
  std::map<std::pair<std::string, std::string>, Obligation> out;
  auto mentions = [](const Node & n, const std::set<int> & vars) {
    bool hit = false;
    std::function<void(const Node &)> walk = [&](const Node & x) {
      if (x.kind == Node::Var && vars.count(x.var)) hit = true;
      for (const auto & k : x.kids) walk(*k);
    };
    walk(n);
    return hit;
  };
  auto decide = [&](const std::function<bool(const State &)> & hyp, const std::function<bool(const State &)> & goal) {
    Obligation o;
    bool any = false;
    for_each_state(m, [&](const State & s) {
      if (!hyp(s)) return false;
      any = true;
      if (!goal(s)) {
        o.status = Status::Failed;
        o.counterexample = s;
        return true;
      }
      return false;
    });
    if (!any) o.status = Status::Vacuous;
    return o;
  };

  std::set<int> all;
  for (size_t i = 0; i < m.vars.size(); ++i) all.insert(static_cast<int>(i));
  for (const auto & [label, inv] : m.invariants) {
    if (!mentions(*inv, all)) continue;
    const Node & body = *inv;
    out[{std::string(evb::kInitialisation), label}] = decide(
      [](const State &) { return true; },
      [&](const State &) {
        return holds(body, [&](int v) -> std::optional<Value> { return m.init[static_cast<size_t>(v)]; });
      });
  }
  for (const auto & e : m.events) {
    if (e.environment) continue;
    std::set<int> assigned;
    std::map<int, NodePtr> value;
    for (const auto & a : e.actions) {
      assigned.insert(a.var);
      value[a.var] = a.value;
    }
    for (const auto & [label, inv] : m.invariants) {
      if (!mentions(*inv, assigned)) continue;
      const Node & body = *inv;
      out[{e.name, label}] = decide([&](const State & s) { return good(m, s) && enabled(e, s); },
                                    [&](const State & s) {
                                      return holds(body, [&](int v) -> std::optional<Value> {
                                        auto it = value.find(v);
                                        if (it == value.end()) return s[static_cast<size_t>(v)];
                                        return eval(*it->second, reader(s));
                                      });
                                    });
    }
  }
  return out;
}

// ---- kernel syntax trees ------------------------------------------------------------

// Evaluates a kernel expression tree over integer states. Identifiers resolve
// through `ident`; membership in a type is true for any defined element
// since states are drawn from the types.
inline std::optional<Value> eval_kernel(const evb::Expr & e,
                                        const std::function<std::optional<Value>(const std::string &)> & ident)
{
  using K = evb::ExprKind;
  auto k = [&](size_t i) { return eval_kernel(*e.args[i], ident); };
  switch (e.kind) {
    case K::IntLit: return e.int_value;
    case K::BoolLit: return e.int_value;
    case K::Ident: return ident(e.name);
    case K::Not: {
      auto a = k(0);
      if (!a) return std::nullopt;
      return *a ? 0 : 1;
    }
    case K::And:
    case K::Or:
    case K::Implies: {
      auto a = k(0);
      if (!a) return std::nullopt;
      if (e.kind == K::And && !*a) return 0;
      if (e.kind == K::Or && *a) return 1;
      if (e.kind == K::Implies && !*a) return 1;
      auto b = k(1);
      if (!b) return std::nullopt;
      return *b ? 1 : 0;
    }
    case K::Member: {
      auto a = k(0);
      if (!a) return std::nullopt;
      return 1;
    }
    default: break;
  }
  auto a = k(0);
  if (!a) return std::nullopt;
  auto b = k(1);
  if (!b) return std::nullopt;
  switch (e.kind) {
    case K::Add: return *a + *b;
    case K::Sub: return *a < *b ? std::nullopt : std::optional<Value>(*a - *b);
    case K::Mul: return *a * *b;
    case K::Div: return *b == 0 ? std::nullopt : std::optional<Value>(*a / *b);
    case K::Eq: return *a == *b;
    case K::Neq: return *a != *b;
    case K::Lt: return *a < *b;
    case K::Le: return *a <= *b;
    case K::Gt: return *a > *b;
    case K::Ge: return *a >= *b;
    default: return std::nullopt;
  }
}

}  // namespace oracle
