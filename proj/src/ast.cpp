// evb/ast.cpp - AST helpers
#include "evb/ast.hpp"

#include <sstream>

namespace evb
{

std::string SourceSpan::to_string() const
{
  std::ostringstream os;
  if (!file.empty()) os << file << ':';
  os << start.line << ':' << start.column;
  return os.str();
}

const char * expr_kind_name(ExprKind k)
{
  switch (k) {
    case ExprKind::IntLit: return "int";
    case ExprKind::BoolLit: return "bool";
    case ExprKind::Ident: return "ident";
    case ExprKind::Add: return "+";
    case ExprKind::Sub: return "-";
    case ExprKind::Mul: return "*";
    case ExprKind::Div: return "/";
    case ExprKind::Eq: return "=";
    case ExprKind::Neq: return "/=";
    case ExprKind::Lt: return "<";
    case ExprKind::Le: return "<=";
    case ExprKind::Gt: return ">";
    case ExprKind::Ge: return ">=";
    case ExprKind::And: return "&";
    case ExprKind::Or: return "or";
    case ExprKind::Implies: return "=>";
    case ExprKind::Not: return "not";
    case ExprKind::SetLit: return "{}";
    case ExprKind::Maplet: return "|->";
    case ExprKind::Member: return ":";
    case ExprKind::TotalFn: return "-->";
    case ExprKind::Partition: return "partition";
    case ExprKind::BoolSet: return "BOOL";
    case ExprKind::NatSet: return "NAT";
  }
  return "?";
}

ExprPtr Expr::make_int(std::int64_t v, SourceSpan span)
{
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::IntLit;
  e->int_value = v;
  e->span = std::move(span);
  return e;
}

ExprPtr Expr::make_bool(bool v, SourceSpan span)
{
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::BoolLit;
  e->int_value = v ? 1 : 0;
  e->span = std::move(span);
  return e;
}

ExprPtr Expr::make_ident(std::string name, SourceSpan span)
{
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Ident;
  e->name = std::move(name);
  e->span = std::move(span);
  return e;
}

ExprPtr Expr::make(ExprKind k, std::vector<ExprPtr> args, SourceSpan span)
{
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->args = std::move(args);
  e->span = std::move(span);
  return e;
}

bool Expr::is_binary_arith() const
{
  return kind == ExprKind::Add || kind == ExprKind::Sub || kind == ExprKind::Mul ||
         kind == ExprKind::Div;
}

bool Expr::is_comparison() const
{
  switch (kind) {
    case ExprKind::Eq:
    case ExprKind::Neq:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge:
      return true;
    default:
      return false;
  }
}

bool structurally_equal(const Expr & a, const Expr & b)
{
  if (a.kind != b.kind || a.int_value != b.int_value || a.name != b.name ||
      a.args.size() != b.args.size()) {
    return false;
  }
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

bool structurally_equal(const ExprPtr & a, const ExprPtr & b)
{
  if (!a || !b) return !a && !b;
  return structurally_equal(*a, *b);
}

void collect_identifiers(const Expr & e, std::set<std::string> & out)
{
  visit_preorder(e, [&](const Expr & n) {
    if (n.kind == ExprKind::Ident) out.insert(n.name);
  });
}

std::set<std::string> identifiers_of(const Expr & e)
{
  std::set<std::string> out;
  collect_identifiers(e, out);
  return out;
}

ExprPtr substitute(const ExprPtr & e, const std::map<std::string, ExprPtr> & subst)
{
  if (e->kind == ExprKind::Ident) {
    auto it = subst.find(e->name);
    return it == subst.end() ? e : it->second;
  }
  if (e->args.empty()) return e;
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  bool changed = false;
  for (const auto & a : e->args) {
    args.push_back(substitute(a, subst));
    changed = changed || args.back() != a;
  }
  if (!changed) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->args = std::move(args);
  return copy;
}

void split_conjuncts(const ExprPtr & e, std::vector<ExprPtr> & out)
{
  if (e->kind == ExprKind::And) {
    for (const auto & a : e->args) split_conjuncts(a, out);
  } else {
    out.push_back(e);
  }
}

ExprPtr make_conjunction(const std::vector<ExprPtr> & parts)
{
  if (parts.empty()) return Expr::make_bool(true);
  ExprPtr acc = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) {
    acc = Expr::make(ExprKind::And, {acc, parts[i]});
  }
  return acc;
}

const char * predicate_kind_name(PredicateKind k)
{
  switch (k) {
    case PredicateKind::Typing: return "typing";
    case PredicateKind::Technical: return "technical";
    case PredicateKind::Property: return "property";
  }
  return "?";
}

PredicateKind kind_from_label(const std::string & label)
{
  if (label.rfind("typ", 0) == 0) return PredicateKind::Typing;
  if (label.rfind("tec", 0) == 0) return PredicateKind::Technical;
  return PredicateKind::Property;
}

const Assignment * EventDef::action_for(const std::string & variable) const
{
  for (const auto & a : actions) {
    if (a.variable == variable) return &a;
  }
  return nullptr;
}

std::set<std::string> EventDef::assigned_variables() const
{
  std::set<std::string> out;
  for (const auto & a : actions) out.insert(a.variable);
  return out;
}

const EventDef * MachineDef::find_event(const std::string & n) const
{
  for (const auto & e : events) {
    if (e.name == n) return &e;
  }
  return nullptr;
}

const std::string & unit_name(const Unit & u)
{
  return std::visit([](const auto & d) -> const std::string & { return d.name; }, u);
}

namespace
{

bool equal_preds(const std::vector<LabeledPredicate> & a, const std::vector<LabeledPredicate> & b)
{
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].label != b[i].label || !structurally_equal(a[i].body, b[i].body)) return false;
  }
  return true;
}

bool equal_events(const EventDef & a, const EventDef & b)
{
  if (a.name != b.name || a.refines != b.refines || a.kind != b.kind ||
      a.convergent != b.convergent || !equal_preds(a.guards, b.guards) ||
      a.actions.size() != b.actions.size()) {
    return false;
  }
  for (size_t i = 0; i < a.actions.size(); ++i) {
    const auto & x = a.actions[i];
    const auto & y = b.actions[i];
    if (x.label != y.label || x.variable != y.variable || !structurally_equal(x.value, y.value)) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool structurally_equal(const ContextDef & a, const ContextDef & b)
{
  return a.name == b.name && a.extends == b.extends && a.sets == b.sets &&
         a.constants == b.constants && equal_preds(a.axioms, b.axioms) &&
         equal_preds(a.theorems, b.theorems);
}

bool structurally_equal(const MachineDef & a, const MachineDef & b)
{
  if (a.name != b.name || a.refines != b.refines || a.sees != b.sees ||
      a.variables != b.variables || !equal_preds(a.invariants, b.invariants) ||
      !equal_preds(a.theorems, b.theorems) || !structurally_equal(a.variant, b.variant) ||
      a.events.size() != b.events.size()) {
    return false;
  }
  for (size_t i = 0; i < a.events.size(); ++i) {
    if (!equal_events(a.events[i], b.events[i])) return false;
  }
  return true;
}

bool structurally_equal(const Unit & a, const Unit & b)
{
  if (a.index() != b.index()) return false;
  if (const auto * c = std::get_if<ContextDef>(&a)) {
    return structurally_equal(*c, std::get<ContextDef>(b));
  }
  return structurally_equal(std::get<MachineDef>(a), std::get<MachineDef>(b));
}

}  // namespace evb
