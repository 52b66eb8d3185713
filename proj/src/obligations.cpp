// evb/obligations.cpp - generation and bounded discharge of proof obligations
#include "evb/obligations.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "evb/errors.hpp"

namespace evb
{

const char * po_kind_name(PoKind k)
{
  switch (k) {
    case PoKind::INV: return "INV";
    case PoKind::WD: return "WD";
    case PoKind::GRD: return "GRD";
    case PoKind::EQL: return "EQL";
    case PoKind::VAR: return "VAR";
    case PoKind::THM: return "THM";
  }
  return "?";
}

const char * po_status_name(PoStatus s)
{
  switch (s) {
    case PoStatus::Pending: return "pending";
    case PoStatus::Discharged: return "discharged";
    case PoStatus::Failed: return "failed";
    case PoStatus::Vacuous: return "vacuous";
  }
  return "?";
}

namespace
{

std::vector<ExprPtr> bodies(const std::vector<LabeledPredicate> & ps)
{
  std::vector<ExprPtr> out;
  for (const auto & p : ps) out.push_back(p.body);
  return out;
}

void add(std::vector<ProofObligation> & out, const std::string & machine, PoKind k, const std::string & event,
         const std::string & label, std::vector<ExprPtr> hyps, ExprPtr goal)
{
  ProofObligation po;
  po.kind = k;
  po.event = event;
  po.label = label;
  po.id = machine + "/" + event + "/" + label + "/" + po_kind_name(k);
  po.hypotheses = std::move(hyps);
  po.goal = std::move(goal);
  out.push_back(std::move(po));
}

// Divisors must be non-zero and subtractions must not leave NAT.
std::vector<ExprPtr> wd_conditions(const ExprPtr & e)
{
  std::vector<ExprPtr> out;
  if (!e) return out;
  visit_preorder(*e, [&](const Expr & n) {
    if (n.kind == ExprKind::Div) {
      out.push_back(Expr::make(ExprKind::Neq, {n.args[1], Expr::make_int(0)}, n.span));
    } else if (n.kind == ExprKind::Sub) {
      out.push_back(Expr::make(ExprKind::Ge, {n.args[0], n.args[1]}, n.span));
    }
  });
  return out;
}

void add_wd(std::vector<ProofObligation> & out, const std::string & machine, const std::string & event,
            const std::string & label, const ExprPtr & e, const std::vector<ExprPtr> & hyps)
{
  const auto conds = wd_conditions(e);
  for (size_t i = 0; i < conds.size(); ++i) {
    add(out, machine, PoKind::WD, event, label, hyps, conds[i]);
    if (i > 0) out.back().id += std::to_string(i + 1);
  }
}

}  // namespace

std::vector<ProofObligation> generate_pos(const Model & m, const FlatMachine * abstract)
{
  const FlatMachine & fm = m.machine();
  const std::string & M = fm.name;
  std::vector<ProofObligation> out;
  const auto all_invariants = bodies(fm.invariants);

  // Invariant preservation, INITIALISATION first.
  std::vector<const EventDef *> model_events{&fm.initialisation()};
  for (const auto * e : fm.model_events()) model_events.push_back(e);
  for (const auto * e : model_events) {
    const auto assigned = e->assigned_variables();
    std::map<std::string, ExprPtr> subst;
    for (const auto & a : e->actions) subst[a.variable] = a.value;
    std::vector<ExprPtr> hyps;
    if (!e->is_initialisation()) {
      hyps = all_invariants;
      for (const auto & g : e->guards) hyps.push_back(g.body);
    }
    for (const auto & inv : fm.invariants) {
      if (is_typing_invariant(inv, fm)) continue;
      const auto ids = identifiers_of(*inv.body);
      const bool touched = std::any_of(ids.begin(), ids.end(), [&](const auto & v) { return assigned.count(v); });
      if (!touched) continue;
      add(out, M, PoKind::INV, e->name, inv.label, hyps, substitute(inv.body, subst));
    }
  }

  // Well-definedness of invariants, guards and actions (environment events too).
  {
    std::vector<ExprPtr> prefix;
    for (const auto & inv : fm.invariants) {
      add_wd(out, M, "INVARIANTS", inv.label, inv.body, prefix);
      prefix.push_back(inv.body);
    }
  }
  for (const auto & e : fm.events) {
    std::vector<ExprPtr> hyps = e.is_initialisation() ? std::vector<ExprPtr>{} : all_invariants;
    for (const auto & g : e.guards) {
      add_wd(out, M, e.name, g.label, g.body, hyps);
      hyps.push_back(g.body);
    }
    for (const auto & a : e.actions) add_wd(out, M, e.name, a.label, a.value, hyps);
  }

  // Guard strengthening and equality of preserved variables.
  if (abstract) {
    for (const auto * e : model_events) {
      for (const auto & target : e->refines) {
        const EventDef * ae = abstract->find_event(target);
        if (!ae || ae->is_environment()) continue;
        std::vector<ExprPtr> hyps;
        if (!e->is_initialisation()) {
          hyps = all_invariants;
          for (const auto & g : e->guards) hyps.push_back(g.body);
        }
        for (const auto & ag : ae->guards) {
          auto it = std::find_if(e->guards.begin(), e->guards.end(), [&](const auto & g) { return g.label == ag.label; });
          if (it != e->guards.end() && structurally_equal(it->body, ag.body)) continue;
          add(out, M, PoKind::GRD, e->name, ag.label, hyps, ag.body);
        }
        for (const auto & aa : ae->actions) {
          const Assignment * ca = e->action_for(aa.variable);
          if (!ca || structurally_equal(ca->value, aa.value)) continue;
          add(out, M, PoKind::EQL, e->name, aa.label, hyps, Expr::make(ExprKind::Eq, {ca->value, aa.value}));
        }
      }
    }
  }

  // Variant decrease for convergent events.
  for (const auto * e : model_events) {
    if (!e->convergent) continue;
    std::vector<ExprPtr> hyps = all_invariants;
    for (const auto & g : e->guards) hyps.push_back(g.body);
    ExprPtr goal = Expr::make_bool(false);
    if (fm.variant) {
      std::map<std::string, ExprPtr> subst;
      for (const auto & a : e->actions) subst[a.variable] = a.value;
      goal = Expr::make(ExprKind::Lt, {substitute(fm.variant, subst), fm.variant});
    }
    add(out, M, PoKind::VAR, e->name, "VARIANT", hyps, goal);
  }

  // Theorems: machine theorems under the invariants, context theorems alone.
  for (const auto & t : fm.theorems) add(out, M, PoKind::THM, "THEOREMS", t.label, all_invariants, t.body);
  for (const auto & t : fm.context.theorems) add(out, M, PoKind::THM, t.origin, t.pred.label, {}, t.pred.body);
  return out;
}

std::vector<ProofObligation> generate_pos(const Project & p, const Model & m)
{
  const auto & fm = m.machine();
  const FlatMachine * abs = fm.abstract_machine ? &p.machine(*fm.abstract_machine) : nullptr;
  return generate_pos(m, abs);
}

// ---- discharge -----------------------------------------------------------

namespace
{

struct Constraint
{
  Compiled code;
  bool negated = false;  // the goal: satisfied when false or ill defined

  bool satisfied(const State & s) const
  {
    Value v = 0;
    const bool ok = code.eval(s.data(), v, nullptr);
    return negated ? (!ok || !v) : (ok && v);
  }
};

// Existence of a model for a set of constraints over bounded slots. The
// search picks the smallest domain first and splits the open slots into
// independent groups at every level; the order only affects speed, since
// lexicographic answers come from fixing slots one at a time outside.
class Solver
{
public:
  Solver(const Model & m, std::vector<Constraint> cs, std::size_t cap)
  : m_(m), cs_(std::move(cs)), cap_(cap), assigned_(m.variables().size(), 0), s_(m.variables().size(), 0)
  {
    for (size_t i = 0; i < s_.size(); ++i) s_[i] = m.range(static_cast<int>(i)).lo;
  }

  std::size_t nodes() const { return nodes_; }
  const State & state() const { return s_; }
  const std::vector<Constraint> & constraints() const { return cs_; }

  void assign(int slot, Value v)
  {
    s_[at(slot)] = v;
    assigned_[at(slot)] = 1;
  }

  void unassign(int slot) { assigned_[at(slot)] = 0; }

  // Slots read by the given constraints, ascending.
  std::vector<int> slots_of(const std::vector<int> & cons) const
  {
    std::vector<int> out;
    for (int c : cons) {
      for (int s : cs_[at(c)].code.slots()) out.push_back(s);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Whether the unassigned slots among `vars` can be chosen so that every
  // constraint in `cons` holds. Assignments are undone before returning.
  bool exists(const std::vector<int> & vars, const std::vector<int> & cons)
  {
    for (int c : cons) {
      if (closed(c) && !cs_[at(c)].satisfied(s_)) return false;
    }
    std::vector<int> open;
    for (int v : vars) {
      if (!assigned_[at(v)]) open.push_back(v);
    }
    return search(open, cons);
  }

private:
  static size_t at(int i) { return static_cast<size_t>(i); }

  bool closed(int c) const
  {
    const auto & sl = cs_[at(c)].code.slots();
    return std::all_of(sl.begin(), sl.end(), [&](int x) { return assigned_[at(x)]; });
  }

  void count()
  {
    if (++nodes_ > cap_) {
      throw ModelError(ErrorCode::ExplorationCapExceeded, std::to_string(nodes_) + " states visited");
    }
  }

  // Groups of `vars` linked through constraints that still have open slots.
  std::vector<std::vector<int>> components(const std::vector<int> & vars, const std::vector<int> & cons) const
  {
    std::vector<int> parent(s_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[at(x)] != x) x = parent[at(x)] = parent[at(parent[at(x)])];
      return x;
    };
    for (int c : cons) {
      int first = -1;
      for (int sl : cs_[at(c)].code.slots()) {
        if (assigned_[at(sl)]) continue;
        if (first < 0) {
          first = sl;
        } else {
          parent[at(find(sl))] = find(first);
        }
      }
    }
    std::map<int, std::vector<int>> groups;
    for (int v : vars) groups[find(v)].push_back(v);
    std::vector<std::vector<int>> out;
    for (auto & entry : groups) out.push_back(std::move(entry.second));
    return out;
  }

  std::vector<int> touching(const std::vector<int> & vars, const std::vector<int> & cons) const
  {
    std::vector<int> out;
    for (int c : cons) {
      const auto & sl = cs_[at(c)].code.slots();
      const bool hit = std::any_of(sl.begin(), sl.end(), [&](int x) {
        return std::find(vars.begin(), vars.end(), x) != vars.end();
      });
      if (hit) out.push_back(c);
    }
    return out;
  }

  bool search(const std::vector<int> & vars, const std::vector<int> & cons)
  {
    if (vars.empty()) return true;
    if (vars.size() > 1) {
      auto groups = components(vars, cons);
      if (groups.size() > 1) {
        for (const auto & g : groups) {
          if (!search_one(g, touching(g, cons))) return false;
        }
        return true;
      }
    }
    return search_one(vars, cons);
  }

  bool search_one(const std::vector<int> & vars, const std::vector<int> & cons)
  {
    size_t pick = 0;
    for (size_t i = 1; i < vars.size(); ++i) {
      if (width(vars[i]) < width(vars[pick])) pick = i;
    }
    const int v = vars[pick];
    std::vector<int> rest = vars;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pick));
    std::vector<int> mine;
    for (int c : cons) {
      const auto & sl = cs_[at(c)].code.slots();
      if (std::find(sl.begin(), sl.end(), v) != sl.end()) mine.push_back(c);
    }
    const Bound r = m_.range(v);
    assigned_[at(v)] = 1;
    bool found = false;
    for (Value x = r.lo; x <= r.hi && !found; ++x) {
      count();
      s_[at(v)] = x;
      bool ok = true;
      for (int c : mine) {
        if (closed(c) && !cs_[at(c)].satisfied(s_)) {
          ok = false;
          break;
        }
      }
      found = ok && search(rest, cons);
    }
    assigned_[at(v)] = 0;
    return found;
  }

  Value width(int v) const
  {
    const Bound r = m_.range(v);
    return r.hi - r.lo;
  }

  const Model & m_;
  std::vector<Constraint> cs_;
  std::size_t cap_;
  std::size_t nodes_ = 0;
  std::vector<char> assigned_;
  State s_;
};

}  // namespace

PoStatus discharge(ProofObligation & po, const Model & m)
{
  std::vector<Constraint> cs;
  for (const auto & h : po.hypotheses) {
    std::vector<ExprPtr> parts;
    split_conjuncts(h, parts);
    for (const auto & p : parts) cs.push_back({m.compile_predicate(p), false});
  }
  const int goal = static_cast<int>(cs.size());
  cs.push_back({m.compile_predicate(po.goal), true});

  Solver solver(m, std::move(cs), m.config().max_states);
  std::vector<int> hyps(static_cast<size_t>(goal));
  std::iota(hyps.begin(), hyps.end(), 0);
  std::vector<int> all = hyps;
  all.push_back(goal);

  if (!solver.exists(solver.slots_of(hyps), hyps)) {
    po.status = PoStatus::Vacuous;
  } else if (const auto vars = solver.slots_of(all); !solver.exists(vars, all)) {
    po.status = PoStatus::Discharged;
  } else {
    // First counterexample in declaration order: fix each slot to the
    // smallest value that still extends to a counterexample. Slots the
    // obligation does not mention stay at their lower bound.
    State cex(m.variables().size());
    for (size_t i = 0; i < cex.size(); ++i) cex[i] = m.range(static_cast<int>(i)).lo;
    for (int v : vars) {
      const Bound r = m.range(v);
      for (Value x = r.lo; x <= r.hi; ++x) {
        solver.assign(v, x);
        if (solver.exists(vars, all)) break;
        solver.unassign(v);
      }
      cex[static_cast<size_t>(v)] = solver.state()[static_cast<size_t>(v)];
    }
    po.counterexample = cex;
    po.status = PoStatus::Failed;
  }
  po.nodes = solver.nodes();
  return po.status;
}


bool is_counterexample(const ProofObligation & po, const Model & m, const State & s)
{
  for (const auto & h : po.hypotheses) {
    if (!m.compile_predicate(h).holds(s.data())) return false;
  }
  return !m.compile_predicate(po.goal).holds(s.data());
}

PoReport report(const Project & p, const Model & m)
{
  const auto start = std::chrono::steady_clock::now();
  PoReport r;
  r.machine = m.name();
  r.obligations = generate_pos(p, m);
  for (auto & po : r.obligations) {
    switch (discharge(po, m)) {
      case PoStatus::Discharged: ++r.discharged; break;
      case PoStatus::Failed: ++r.failed; break;
      case PoStatus::Vacuous: ++r.vacuous; break;
      case PoStatus::Pending: break;
    }
  }
  r.total = r.obligations.size();
  r.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace evb
