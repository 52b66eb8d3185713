// evb/printer.cpp - pretty printer
#include "evb/printer.hpp"

#include <sstream>

namespace evb
{

namespace
{

enum Prec : int {
  kImplies = 1,
  kOr = 2,
  kAnd = 3,
  kNot = 4,
  kRel = 5,
  kFn = 6,
  kMaplet = 7,
  kAdd = 8,
  kMul = 9,
  kAtom = 10,
};

int precedence(const Expr & e)
{
  switch (e.kind) {
    case ExprKind::Implies: return kImplies;
    case ExprKind::Or: return kOr;
    case ExprKind::And: return kAnd;
    case ExprKind::Not: return kNot;
    case ExprKind::Eq:
    case ExprKind::Neq:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge:
    case ExprKind::Member: return kRel;
    case ExprKind::TotalFn: return kFn;
    case ExprKind::Maplet: return kMaplet;
    case ExprKind::Add:
    case ExprKind::Sub: return kAdd;
    case ExprKind::Mul:
    case ExprKind::Div: return kMul;
    default: return kAtom;
  }
}

const char * op_text(ExprKind k, bool unicode)
{
  switch (k) {
    case ExprKind::Implies: return unicode ? " ⇒ " : " => ";
    case ExprKind::Or: return unicode ? " ∨ " : " | ";
    case ExprKind::And: return unicode ? " ∧ " : " & ";
    case ExprKind::Eq: return " = ";
    case ExprKind::Neq: return unicode ? " ≠ " : " /= ";
    case ExprKind::Lt: return " < ";
    case ExprKind::Le: return unicode ? " ≤ " : " <= ";
    case ExprKind::Gt: return " > ";
    case ExprKind::Ge: return unicode ? " ≥ " : " >= ";
    case ExprKind::Member: return unicode ? " ∈ " : " : ";
    case ExprKind::TotalFn: return unicode ? " → " : " --> ";
    case ExprKind::Maplet: return unicode ? " ↦ " : " |-> ";
    case ExprKind::Add: return " + ";
    case ExprKind::Sub: return " - ";
    case ExprKind::Mul: return unicode ? " × " : " * ";
    case ExprKind::Div: return unicode ? " ÷ " : " / ";
    default: return " ? ";
  }
}

void print(std::ostream & os, const Expr & e, const PrintOptions & o);

void print_child(std::ostream & os, const Expr & c, bool parens, const PrintOptions & o)
{
  if (parens) os << '(';
  print(os, c, o);
  if (parens) os << ')';
}

void print_list(std::ostream & os, const std::vector<ExprPtr> & items, const PrintOptions & o)
{
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) os << ", ";
    print(os, *items[i], o);
  }
}

void print(std::ostream & os, const Expr & e, const PrintOptions & o)
{
  switch (e.kind) {
    case ExprKind::IntLit: os << e.int_value; return;
    case ExprKind::BoolLit: os << (e.int_value ? "TRUE" : "FALSE"); return;
    case ExprKind::Ident: os << e.name; return;
    case ExprKind::BoolSet: os << "BOOL"; return;
    case ExprKind::NatSet: os << (o.unicode ? "ℕ" : "NAT"); return;
    case ExprKind::SetLit:
      os << '{';
      print_list(os, e.args, o);
      os << '}';
      return;
    case ExprKind::Partition:
      os << "partition(";
      print_list(os, e.args, o);
      os << ')';
      return;
    case ExprKind::Not:
      os << (o.unicode ? "¬" : "not ");
      print_child(os, *e.args[0], precedence(*e.args[0]) < kNot, o);
      return;
    default: break;
  }
  const int p = precedence(e);
  const Expr & l = *e.args[0];
  const Expr & r = *e.args[1];
  bool left_parens = false;
  bool right_parens = false;
  if (e.kind == ExprKind::Implies) {
    left_parens = precedence(l) <= p;
    right_parens = precedence(r) < p;
  } else if (p == kRel || p == kFn) {
    left_parens = precedence(l) <= p;
    right_parens = precedence(r) <= p;
  } else {
    left_parens = precedence(l) < p;
    right_parens = precedence(r) <= p;
  }
  print_child(os, l, left_parens, o);
  os << op_text(e.kind, o.unicode);
  print_child(os, r, right_parens, o);
}

void print_ids(std::ostream & os, const char * keyword, const std::vector<std::string> & ids)
{
  if (ids.empty()) return;
  os << keyword << "\n  ";
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) os << ", ";
    os << ids[i];
  }
  os << '\n';
}

void print_preds(
  std::ostream & os, const char * keyword, const std::vector<LabeledPredicate> & ps,
  const PrintOptions & o, const std::string & indent = "  ")
{
  if (ps.empty()) return;
  if (keyword) os << keyword << '\n';
  for (const auto & p : ps) {
    os << indent << p.label << ' ' << to_text(p.body, o) << '\n';
  }
}

}  // namespace

std::string to_text(const Expr & e, const PrintOptions & opts)
{
  std::ostringstream os;
  print(os, e, opts);
  return os.str();
}

std::string to_text(const ExprPtr & e, const PrintOptions & opts)
{
  return e ? to_text(*e, opts) : std::string();
}

std::string pretty_print(const ContextDef & c, const PrintOptions & o)
{
  std::ostringstream os;
  os << "CONTEXT\n  " << c.name << '\n';
  print_ids(os, "EXTENDS", c.extends);
  print_ids(os, "SETS", c.sets);
  print_ids(os, "CONSTANTS", c.constants);
  print_preds(os, "AXIOMS", c.axioms, o);
  print_preds(os, "THEOREMS", c.theorems, o);
  os << "END\n";
  return os.str();
}

std::string pretty_print(const MachineDef & m, const PrintOptions & o)
{
  std::ostringstream os;
  os << "MACHINE\n  " << m.name << '\n';
  if (m.refines) os << "REFINES\n  " << *m.refines << '\n';
  print_ids(os, "SEES", m.sees);
  print_ids(os, "VARIABLES", m.variables);
  print_preds(os, "INVARIANTS", m.invariants, o);
  print_preds(os, "THEOREMS", m.theorems, o);
  if (m.variant) os << "VARIANT\n  " << to_text(m.variant, o) << '\n';
  if (!m.events.empty()) os << "EVENTS\n";
  for (const auto & e : m.events) {
    os << "  Event ";
    if (e.is_environment()) os << "environment ";
    if (e.convergent) os << "convergent ";
    os << e.name;
    if (!e.refines.empty()) {
      os << " REFINES ";
      for (size_t i = 0; i < e.refines.size(); ++i) {
        if (i) os << ", ";
        os << e.refines[i];
      }
    }
    os << '\n';
    if (!e.guards.empty()) {
      os << "    Where\n";
      print_preds(os, nullptr, e.guards, o, "      ");
    }
    os << "    Then\n";
    for (const auto & a : e.actions) {
      os << "      " << a.label << ' ' << a.variable << " := " << to_text(a.value, o) << '\n';
    }
    os << "  End\n";
  }
  os << "END\n";
  return os.str();
}

std::string pretty_print(const Unit & u, const PrintOptions & o)
{
  return std::visit([&](const auto & d) { return pretty_print(d, o); }, u);
}

}  // namespace evb
