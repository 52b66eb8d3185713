// evb/project.cpp - resolution and flattening
#include "evb/project.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "evb/errors.hpp"

namespace evb
{

bool FlatContext::has_set(const std::string & n) const
{
  return std::any_of(sets.begin(), sets.end(), [&](const Declared & d) { return d.name == n; });
}

bool FlatContext::has_constant(const std::string & n) const
{
  return std::any_of(
    constants.begin(), constants.end(), [&](const Declared & d) { return d.name == n; });
}

std::vector<const ContextAxiom *> FlatContext::active_axioms() const
{
  std::vector<const ContextAxiom *> out;
  for (const auto & a : axioms) {
    if (!a.superseded) out.push_back(&a);
  }
  return out;
}

AxiomClasses classify_axioms(const FlatContext & c)
{
  AxiomClasses out;
  for (const auto & a : c.axioms) {
    switch (a.pred.kind()) {
      case PredicateKind::Typing: out.typing.push_back(a.pred.label); break;
      case PredicateKind::Technical: out.technical.push_back(a.pred.label); break;
      case PredicateKind::Property: out.property.push_back(a.pred.label); break;
    }
  }
  return out;
}

const EventDef * FlatMachine::find_event(const std::string & n) const
{
  for (const auto & e : events) {
    if (e.name == n) return &e;
  }
  return nullptr;
}

const EventDef & FlatMachine::initialisation() const
{
  const auto * e = find_event(kInitialisation);
  if (!e) throw ModelError(ErrorCode::MalformedDefinition, name + " has no INITIALISATION");
  return *e;
}

bool FlatMachine::has_variable(const std::string & v) const
{
  return std::find(variables.begin(), variables.end(), v) != variables.end();
}

std::vector<const EventDef *> FlatMachine::model_events() const
{
  std::vector<const EventDef *> out;
  for (const auto & e : events) {
    if (!e.is_environment() && !e.is_initialisation()) out.push_back(&e);
  }
  return out;
}

std::vector<const EventDef *> FlatMachine::environment_events() const
{
  std::vector<const EventDef *> out;
  for (const auto & e : events) {
    if (e.is_environment()) out.push_back(&e);
  }
  return out;
}

namespace
{

[[noreturn]] void fail(ErrorCode c, const std::string & msg) { throw ModelError(c, msg); }

std::string join_path(const std::vector<std::string> & path)
{
  std::string out;
  for (const auto & p : path) {
    if (!out.empty()) out += " -> ";
    out += p;
  }
  return out;
}

// Depth-first topological walk that reports the offending cycle.
template <typename Next>
void topo_visit(
  const std::string & node, Next && next, std::map<std::string, int> & state,
  std::vector<std::string> & stack, std::vector<std::string> & order)
{
  auto & st = state[node];
  if (st == 2) return;
  if (st == 1) {
    auto it = std::find(stack.begin(), stack.end(), node);
    std::vector<std::string> cycle(it, stack.end());
    cycle.push_back(node);
    fail(ErrorCode::CyclicExtension, join_path(cycle));
  }
  st = 1;
  stack.push_back(node);
  for (const auto & n : next(node)) topo_visit(n, next, state, stack, order);
  stack.pop_back();
  state[node] = 2;
  order.push_back(node);
}

void add_unique_decl(
  std::vector<Declared> & into, const Declared & d, const std::string & where,
  const std::set<std::string> & other_names)
{
  for (const auto & x : into) {
    if (x.name == d.name) {
      if (x.origin == d.origin) return;  // same declaration seen through two paths
      fail(ErrorCode::DuplicateName, d.name + " declared in both " + x.origin + " and " + d.origin +
                                       " (" + where + ")");
    }
  }
  if (other_names.count(d.name)) {
    fail(ErrorCode::DuplicateName, d.name + " used as both set and constant (" + where + ")");
  }
  into.push_back(d);
}

void add_unique_axiom(std::vector<ContextAxiom> & into, const ContextAxiom & a, const std::string & where)
{
  for (const auto & x : into) {
    if (x.pred.label == a.pred.label) {
      if (x.origin == a.origin) return;
      fail(ErrorCode::DuplicateName,
           "label " + a.pred.label + " in both " + x.origin + " and " + a.origin + " (" + where + ")");
    }
  }
  into.push_back(a);
}

std::set<std::string> names_of(const std::vector<Declared> & ds)
{
  std::set<std::string> out;
  for (const auto & d : ds) out.insert(d.name);
  return out;
}

// Merges several flattened contexts into one view.
FlatContext merge_contexts(
  const std::string & name, const std::vector<const FlatContext *> & parts,
  const std::map<std::string, FlatContext> & all)
{
  FlatContext out;
  out.name = name;
  for (const auto * p : parts) {
    for (const auto & a : p->ancestors) {
      if (std::find(out.ancestors.begin(), out.ancestors.end(), a) == out.ancestors.end()) {
        out.ancestors.push_back(a);
      }
    }
    for (const auto & s : p->sets) add_unique_decl(out.sets, s, name, names_of(out.constants));
    for (const auto & c : p->constants) add_unique_decl(out.constants, c, name, names_of(out.sets));
    for (const auto & a : p->axioms) add_unique_axiom(out.axioms, a, name);
    for (const auto & t : p->theorems) add_unique_axiom(out.theorems, t, name);
  }

  // Partition supersession: a partition of S declared in context D
  // supersedes partitions of S declared in contexts that D extends.
  auto partitioned_set = [](const ContextAxiom & a) -> std::string {
    const auto & b = *a.pred.body;
    if (b.kind == ExprKind::Partition && !b.args.empty() && b.args[0]->kind == ExprKind::Ident) {
      return b.args[0]->name;
    }
    return {};
  };
  auto extends_ctx = [&](const std::string & d, const std::string & c) {
    if (d == c) return false;
    const auto & anc = all.at(d).ancestors;
    return std::find(anc.begin(), anc.end(), c) != anc.end();
  };
  for (auto & a : out.axioms) a.superseded = false;
  for (auto & a : out.axioms) {
    const auto set = partitioned_set(a);
    if (set.empty()) continue;
    for (const auto & b : out.axioms) {
      if (&a == &b || partitioned_set(b) != set || !extends_ctx(b.origin, a.origin)) continue;
      // The superseding partition must keep every element of the old one.
      std::set<std::string> newer;
      for (size_t i = 1; i < b.pred.body->args.size(); ++i) {
        collect_identifiers(*b.pred.body->args[i], newer);
      }
      for (size_t i = 1; i < a.pred.body->args.size(); ++i) {
        for (const auto & id : identifiers_of(*a.pred.body->args[i])) {
          if (!newer.count(id)) {
            fail(ErrorCode::MalformedDefinition,
                 b.origin + "." + b.pred.label + " re-partitions " + set + " without " + id);
          }
        }
      }
      a.superseded = true;
    }
  }
  return out;
}

void check_references(
  const ExprPtr & e, const std::set<std::string> & known, const std::string & where)
{
  if (!e) return;
  for (const auto & id : identifiers_of(*e)) {
    if (!known.count(id)) fail(ErrorCode::UnresolvedReference, id + " in " + where);
  }
}

void overlay_guards(std::vector<LabeledPredicate> & into, const std::vector<LabeledPredicate> & from)
{
  for (const auto & g : from) {
    auto it = std::find_if(into.begin(), into.end(), [&](const auto & x) { return x.label == g.label; });
    if (it != into.end()) {
      *it = g;
    } else {
      into.push_back(g);
    }
  }
}

void overlay_actions(std::vector<Assignment> & into, const std::vector<Assignment> & from)
{
  for (const auto & a : from) {
    auto it = std::find_if(into.begin(), into.end(), [&](const auto & x) {
      return x.label == a.label || x.variable == a.variable;
    });
    if (it != into.end()) {
      *it = a;
    } else {
      into.push_back(a);
    }
  }
}

}  // namespace

const ContextDef * Project::raw_context(const std::string & name) const
{
  for (const auto & u : units_) {
    if (const auto * c = std::get_if<ContextDef>(&u); c && c->name == name) return c;
  }
  return nullptr;
}

const MachineDef * Project::raw_machine(const std::string & name) const
{
  for (const auto & u : units_) {
    if (const auto * m = std::get_if<MachineDef>(&u); m && m->name == name) return m;
  }
  return nullptr;
}

const FlatContext & Project::context(const std::string & name) const
{
  auto it = contexts_.find(name);
  if (it == contexts_.end()) fail(ErrorCode::UnresolvedReference, "context " + name);
  return it->second;
}

const FlatMachine & Project::machine(const std::string & name) const
{
  auto it = machines_.find(name);
  if (it == machines_.end()) fail(ErrorCode::UnknownMachine, name);
  return it->second;
}

std::vector<std::string> Project::context_names() const
{
  std::vector<std::string> out;
  for (const auto & u : units_) {
    if (std::holds_alternative<ContextDef>(u)) out.push_back(unit_name(u));
  }
  return out;
}

std::vector<std::string> Project::machine_names() const
{
  std::vector<std::string> out;
  for (const auto & u : units_) {
    if (std::holds_alternative<MachineDef>(u)) out.push_back(unit_name(u));
  }
  return out;
}

Project Project::resolve(std::vector<Unit> defs)
{
  Project p;
  p.units_ = std::move(defs);

  std::set<std::string> names;
  for (const auto & u : p.units_) {
    if (!names.insert(unit_name(u)).second) fail(ErrorCode::DuplicateName, "unit " + unit_name(u));
  }

  // Contexts, in EXTENDS order.
  std::map<std::string, const ContextDef *> raw_ctx;
  for (const auto & u : p.units_) {
    if (const auto * c = std::get_if<ContextDef>(&u)) raw_ctx[c->name] = c;
  }
  for (const auto & [name, c] : raw_ctx) {
    for (const auto & e : c->extends) {
      if (!raw_ctx.count(e)) fail(ErrorCode::UnresolvedReference, name + " EXTENDS " + e);
    }
  }
  std::vector<std::string> ctx_order;
  {
    std::map<std::string, int> state;
    std::vector<std::string> stack;
    auto next = [&](const std::string & n) { return raw_ctx.at(n)->extends; };
    for (const auto & [name, c] : raw_ctx) topo_visit(name, next, state, stack, ctx_order);
  }
  for (const auto & name : ctx_order) {
    const auto & raw = *raw_ctx.at(name);
    std::vector<const FlatContext *> parts;
    for (const auto & e : raw.extends) parts.push_back(&p.contexts_.at(e));
    FlatContext own;
    own.name = name;
    own.ancestors = {name};
    for (const auto & s : raw.sets) own.sets.push_back({s, name});
    for (const auto & c : raw.constants) own.constants.push_back({c, name});
    for (const auto & a : raw.axioms) own.axioms.push_back({a, name, false});
    for (const auto & t : raw.theorems) own.theorems.push_back({t, name, false});
    {
      std::set<std::string> seen;
      for (const auto & s : raw.sets) {
        if (!seen.insert(s).second) fail(ErrorCode::DuplicateName, s + " in " + name);
      }
      for (const auto & c : raw.constants) {
        if (!seen.insert(c).second) fail(ErrorCode::DuplicateName, c + " in " + name);
      }
    }
    parts.push_back(&own);
    // merge_contexts needs this context's ancestor list to resolve supersession.
    FlatContext pre;
    pre.name = name;
    for (const auto * part : parts) {
      for (const auto & a : part->ancestors) {
        if (std::find(pre.ancestors.begin(), pre.ancestors.end(), a) == pre.ancestors.end()) {
          pre.ancestors.push_back(a);
        }
      }
    }
    p.contexts_[name] = pre;
    auto flat = merge_contexts(name, parts, p.contexts_);
    std::set<std::string> known = names_of(flat.sets);
    for (const auto & c : flat.constants) known.insert(c.name);
    for (const auto & a : flat.axioms) check_references(a.pred.body, known, name + "." + a.pred.label);
    for (const auto & t : flat.theorems) check_references(t.pred.body, known, name + "." + t.pred.label);
    p.contexts_[name] = std::move(flat);
  }

  // Machines, in REFINES order.
  std::map<std::string, const MachineDef *> raw_m;
  for (const auto & u : p.units_) {
    if (const auto * m = std::get_if<MachineDef>(&u)) raw_m[m->name] = m;
  }
  for (const auto & [name, m] : raw_m) {
    if (m->refines) {
      if (!raw_m.count(*m->refines)) fail(ErrorCode::UnresolvedReference, name + " REFINES " + *m->refines);
      p.edges_[name] = *m->refines;
    }
    for (const auto & s : m->sees) {
      if (!raw_ctx.count(s)) fail(ErrorCode::UnresolvedReference, name + " SEES " + s);
    }
  }
  std::vector<std::string> m_order;
  {
    std::map<std::string, int> state;
    std::vector<std::string> stack;
    auto next = [&](const std::string & n) {
      const auto * m = raw_m.at(n);
      return m->refines ? std::vector<std::string>{*m->refines} : std::vector<std::string>{};
    };
    for (const auto & [name, m] : raw_m) topo_visit(name, next, state, stack, m_order);
  }

  for (const auto & name : m_order) {
    const auto & raw = *raw_m.at(name);
    const FlatMachine * parent = raw.refines ? &p.machines_.at(*raw.refines) : nullptr;
    FlatMachine fm;
    fm.name = name;
    fm.abstract_machine = raw.refines;
    if (parent) fm.chain = parent->chain;
    fm.chain.push_back(name);
    if (parent) fm.sees = parent->sees;
    for (const auto & s : raw.sees) {
      if (std::find(fm.sees.begin(), fm.sees.end(), s) == fm.sees.end()) fm.sees.push_back(s);
    }
    {
      std::vector<const FlatContext *> parts;
      for (const auto & s : fm.sees) parts.push_back(&p.contexts_.at(s));
      fm.context = merge_contexts(name, parts, p.contexts_);
    }

    // Raw well-formedness.
    int inits = 0;
    for (const auto & e : raw.events) {
      if (e.is_initialisation()) {
        ++inits;
        if (!e.guards.empty()) fail(ErrorCode::MalformedDefinition, name + ".INITIALISATION has guards");
      }
      std::set<std::string> assigned;
      for (const auto & a : e.actions) {
        if (!assigned.insert(a.variable).second) {
          fail(ErrorCode::MalformedDefinition, name + "." + e.name + " assigns " + a.variable + " twice");
        }
      }
    }
    if (inits != 1) fail(ErrorCode::MalformedDefinition, name + " needs exactly one INITIALISATION");
    {
      const auto * init = raw.initialisation();
      for (const auto & v : raw.variables) {
        if (!init->action_for(v)) {
          fail(ErrorCode::MalformedDefinition, name + ".INITIALISATION does not assign " + v);
        }
      }
    }

    if (parent) {
      fm.variables = parent->variables;
      fm.invariants = parent->invariants;
      fm.invariant_origin = parent->invariant_origin;
      fm.theorems = parent->theorems;
    }
    for (const auto & v : raw.variables) {
      if (fm.has_variable(v)) fail(ErrorCode::DuplicateName, "variable " + v + " in " + name);
      fm.variables.push_back(v);
    }
    for (const auto & inv : raw.invariants) {
      if (fm.invariant_origin.count(inv.label)) {
        fail(ErrorCode::DuplicateName, "invariant " + inv.label + " in " + name);
      }
      fm.invariants.push_back(inv);
      fm.invariant_origin[inv.label] = name;
    }
    for (const auto & t : raw.theorems) fm.theorems.push_back(t);
    fm.variant = raw.variant;

    // Events: inherited ones implicitly refine themselves; a concrete event
    // refines the listed events, or the same-named one.
    if (parent) {
      for (auto e : parent->events) {
        e.refines = {e.name};
        fm.events.push_back(std::move(e));
      }
    }
    for (const auto & ce : raw.events) {
      std::vector<std::string> targets = ce.refines;
      if (targets.empty() && parent && parent->find_event(ce.name)) targets = {ce.name};
      if (!targets.empty() && !parent) {
        fail(ErrorCode::UnresolvedReference, name + "." + ce.name + " refines without REFINES machine");
      }
      if (targets.empty()) {
        if (fm.find_event(ce.name)) fail(ErrorCode::DuplicateName, "event " + ce.name + " in " + name);
        fm.events.push_back(ce);
        continue;
      }
      EventDef merged;
      size_t insert_at = fm.events.size();
      for (const auto & t : targets) {
        const auto * ae = parent->find_event(t);
        if (!ae) fail(ErrorCode::UnresolvedReference, name + "." + ce.name + " refines " + t);
        overlay_guards(merged.guards, ae->guards);
        overlay_actions(merged.actions, ae->actions);
        auto it = std::find_if(fm.events.begin(), fm.events.end(), [&](const auto & e) { return e.name == t; });
        if (it != fm.events.end()) {
          insert_at = std::min(insert_at, static_cast<size_t>(it - fm.events.begin()));
        }
      }
      fm.events.erase(
        std::remove_if(fm.events.begin(), fm.events.end(), [&](const EventDef & e) {
          return std::find(targets.begin(), targets.end(), e.name) != targets.end();
        }),
        fm.events.end());
      insert_at = std::min(insert_at, fm.events.size());
      if (fm.find_event(ce.name)) fail(ErrorCode::DuplicateName, "event " + ce.name + " in " + name);
      overlay_guards(merged.guards, ce.guards);
      overlay_actions(merged.actions, ce.actions);
      merged.name = ce.name;
      merged.refines = targets;
      merged.kind = ce.kind;
      merged.convergent = ce.convergent;
      merged.span = ce.span;
      fm.events.insert(fm.events.begin() + static_cast<std::ptrdiff_t>(insert_at), std::move(merged));
    }

    // References against the flattened view.
    std::set<std::string> known(fm.variables.begin(), fm.variables.end());
    for (const auto & s : fm.context.sets) known.insert(s.name);
    for (const auto & c : fm.context.constants) known.insert(c.name);
    for (const auto & inv : fm.invariants) check_references(inv.body, known, name + "." + inv.label);
    for (const auto & t : fm.theorems) check_references(t.body, known, name + "." + t.label);
    check_references(fm.variant, known, name + ".VARIANT");
    for (const auto & e : fm.events) {
      for (const auto & g : e.guards) check_references(g.body, known, name + "." + e.name + "." + g.label);
      for (const auto & a : e.actions) {
        if (!fm.has_variable(a.variable)) {
          fail(ErrorCode::UnresolvedReference, "variable " + a.variable + " assigned in " + name + "." + e.name);
        }
        check_references(a.value, known, name + "." + e.name + "." + a.label);
      }
    }
    const auto & init = fm.initialisation();
    for (const auto & v : fm.variables) {
      if (!init.action_for(v)) fail(ErrorCode::MalformedDefinition, name + ".INITIALISATION does not assign " + v);
    }
    p.machines_[name] = std::move(fm);
  }
  return p;
}

const FlatMachine & flatten_machine(const Project & p, const std::string & machine)
{
  return p.machine(machine);
}

MachineDef to_machine_def(const FlatMachine & m)
{
  MachineDef d;
  d.name = m.name;
  d.sees = m.sees;
  d.variables = m.variables;
  d.invariants = m.invariants;
  d.theorems = m.theorems;
  d.variant = m.variant;
  d.events = m.events;
  for (auto & e : d.events) e.refines.clear();
  return d;
}

bool structurally_equal(const Project & a, const Project & b)
{
  if (a.units().size() != b.units().size() || a.refinement_edges() != b.refinement_edges()) return false;
  for (size_t i = 0; i < a.units().size(); ++i) {
    if (!structurally_equal(a.units()[i], b.units()[i])) return false;
  }
  return true;
}

}  // namespace evb
