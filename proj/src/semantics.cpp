// evb/semantics.cpp - universe construction, expression compiler and evaluator
#include "evb/semantics.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "evb/errors.hpp"
#include "evb/parser.hpp"
#include "evb/printer.hpp"

namespace evb
{

// ---- types ---------------------------------------------------------------

Type Type::function(std::string domain, const Type & range)
{
  Type t;
  t.kind = TypeKind::Function;
  t.carrier = std::move(domain);
  t.range_kind = range.kind;
  t.range_carrier = range.carrier;
  return t;
}

Type Type::range() const
{
  return range_kind == TypeKind::Bool ? Type::boolean() : Type::enumeration(range_carrier);
}

std::string Type::to_string() const
{
  switch (kind) {
    case TypeKind::Bool: return "BOOL";
    case TypeKind::Nat: return "NAT";
    case TypeKind::Enum: return carrier;
    case TypeKind::Function: return carrier + " --> " + range().to_string();
  }
  return "?";
}

bool Type::operator==(const Type & o) const
{
  if (kind != o.kind) return false;
  switch (kind) {
    case TypeKind::Bool:
    case TypeKind::Nat: return true;
    case TypeKind::Enum: return carrier == o.carrier;
    case TypeKind::Function:
      return carrier == o.carrier && range_kind == o.range_kind && range_carrier == o.range_carrier;
  }
  return false;
}

const char * wd_reason_name(WdReason r)
{
  switch (r) {
    case WdReason::DivisionByZero: return "division-by-zero";
    case WdReason::NaturalUnderflow: return "natural-underflow";
    case WdReason::FunctionOutsideDomain: return "function-applied-outside-domain";
  }
  return "?";
}

std::string WdFailure::message() const
{
  return location.to_string() + ": " + wd_reason_name(reason);
}

Value function_image(Value code, int index, Value range_size)
{
  for (int i = 0; i < index; ++i) code /= range_size;
  return code % range_size;
}

Value function_with(Value code, int index, Value image, Value range_size)
{
  Value weight = 1;
  for (int i = 0; i < index; ++i) weight *= range_size;
  const Value old = (code / weight) % range_size;
  return code + (image - old) * weight;
}

namespace
{

[[noreturn]] void fail(ErrorCode c, const std::string & msg) { throw ModelError(c, msg); }

std::string where(const Expr & e) { return e.span.to_string() + ": "; }

bool parse_nat(const std::string & s, Value & out)
{
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && out >= 0;
}

}  // namespace

// ---- compiler ------------------------------------------------------------

class Compiler
{
public:
  Compiler(const Universe & u, const std::map<std::string, int> & slots, const std::vector<Type> & types)
  : u_(u), slots_(slots), types_(types)
  {
  }

  Compiled predicate(const ExprPtr & e)
  {
    Type t;
    out_.source_ = e;
    out_.root_ = compile(*e, nullptr, t);
    if (t.kind != TypeKind::Bool) fail(ErrorCode::TypeError, where(*e) + "predicate expected, found " + t.to_string());
    return finish();
  }

  Compiled value(const ExprPtr & e, const Type & expected)
  {
    Type t;
    out_.source_ = e;
    out_.root_ = compile(*e, &expected, t);
    if (t != expected) {
      fail(ErrorCode::TypeError, where(*e) + "expected " + expected.to_string() + ", found " + t.to_string());
    }
    return finish();
  }

private:
  using Op = Compiled::Op;
  using Node = Compiled::Node;

  Compiled finish()
  {
    std::set<int> s;
    for (const auto & n : out_.nodes_) {
      if (n.op == Op::Var) s.insert(static_cast<int>(n.imm));
    }
    out_.slots_.assign(s.begin(), s.end());
    return std::move(out_);
  }

  int emit(Node n)
  {
    out_.nodes_.push_back(std::move(n));
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int leaf(Op op, Value imm, const Expr & src)
  {
    Node n;
    n.op = op;
    n.imm = imm;
    n.src = &src;
    return emit(std::move(n));
  }

  int node(Op op, std::vector<int> kids, const Expr & src)
  {
    Node n;
    n.op = op;
    n.kids = std::move(kids);
    n.src = &src;
    return emit(std::move(n));
  }

  void expect(const Expr & e, const Type & got, const Type & want)
  {
    if (got != want) {
      fail(ErrorCode::TypeError, where(e) + "expected " + want.to_string() + ", found " + got.to_string());
    }
  }

  int compile_as(const Expr & e, const Type & want)
  {
    Type t;
    const int n = compile(e, &want, t);
    expect(e, t, want);
    return n;
  }

  int compile(const Expr & e, const Type * expected, Type & out)
  {
    switch (e.kind) {
      case ExprKind::IntLit:
        out = Type::nat();
        return leaf(Op::Lit, e.int_value, e);
      case ExprKind::BoolLit:
        out = Type::boolean();
        return leaf(Op::Lit, e.int_value ? 1 : 0, e);
      case ExprKind::Ident: {
        if (auto it = slots_.find(e.name); it != slots_.end()) {
          out = types_[static_cast<size_t>(it->second)];
          return leaf(Op::Var, it->second, e);
        }
        if (const auto * c = u_.constant(e.name)) {
          out = c->type;
          return leaf(Op::Lit, c->value, e);
        }
        if (u_.is_set(e.name)) fail(ErrorCode::TypeError, where(e) + "set " + e.name + " used as a value");
        fail(ErrorCode::UnresolvedReference, where(e) + e.name);
      }
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div: {
        const int a = compile_as(*e.args[0], Type::nat());
        const int b = compile_as(*e.args[1], Type::nat());
        out = Type::nat();
        const Op op = e.kind == ExprKind::Add ? Op::Add
                      : e.kind == ExprKind::Sub ? Op::Sub
                      : e.kind == ExprKind::Mul ? Op::Mul
                                                : Op::Div;
        return node(op, {a, b}, e);
      }
      case ExprKind::Lt:
      case ExprKind::Le:
      case ExprKind::Gt:
      case ExprKind::Ge: {
        const int a = compile_as(*e.args[0], Type::nat());
        const int b = compile_as(*e.args[1], Type::nat());
        out = Type::boolean();
        const Op op = e.kind == ExprKind::Lt ? Op::Lt
                      : e.kind == ExprKind::Le ? Op::Le
                      : e.kind == ExprKind::Gt ? Op::Gt
                                               : Op::Ge;
        return node(op, {a, b}, e);
      }
      case ExprKind::Eq:
      case ExprKind::Neq: {
        const Expr & l = *e.args[0];
        const Expr & r = *e.args[1];
        int a = -1;
        int b = -1;
        if (l.kind == ExprKind::SetLit && r.kind == ExprKind::SetLit) {
          // Both sides literal (after substitution): type from the elements.
          const Type ft = literal_type(l);
          a = compile_as(l, ft);
          b = compile_as(r, ft);
        } else if (l.kind == ExprKind::SetLit) {
          Type rt;
          b = compile(r, nullptr, rt);
          a = compile_as(l, rt);
        } else {
          Type lt;
          a = compile(l, nullptr, lt);
          b = compile_as(r, lt);
        }
        out = Type::boolean();
        return node(e.kind == ExprKind::Eq ? Op::Eq : Op::Neq, {a, b}, e);
      }
      case ExprKind::And:
      case ExprKind::Or:
      case ExprKind::Implies: {
        const int a = compile_as(*e.args[0], Type::boolean());
        const int b = compile_as(*e.args[1], Type::boolean());
        out = Type::boolean();
        const Op op = e.kind == ExprKind::And ? Op::And : e.kind == ExprKind::Or ? Op::Or : Op::Implies;
        return node(op, {a, b}, e);
      }
      case ExprKind::Not: {
        const int a = compile_as(*e.args[0], Type::boolean());
        out = Type::boolean();
        return node(Op::Not, {a}, e);
      }
      case ExprKind::SetLit: return map_literal(e, expected, out);
      case ExprKind::Member: return membership(e, out);
      case ExprKind::Partition: return partition(e, out);
      case ExprKind::Maplet: fail(ErrorCode::TypeError, where(e) + "maplet outside a set literal");
      case ExprKind::TotalFn: fail(ErrorCode::TypeError, where(e) + "function type used as a value");
      case ExprKind::BoolSet:
      case ExprKind::NatSet: fail(ErrorCode::TypeError, where(e) + "set used as a value");
    }
    fail(ErrorCode::TypeError, where(e) + "unsupported expression");
  }

  // Function type of a literal whose first maplet names an element and an
  // element or boolean.
  Type literal_type(const Expr & e)
  {
    if (!e.args.empty() && e.args[0]->kind == ExprKind::Maplet) {
      const Expr & d = *e.args[0]->args[0];
      const Expr & r = *e.args[0]->args[1];
      const ConstantValue * dc = d.kind == ExprKind::Ident ? u_.constant(d.name) : nullptr;
      if (dc && dc->type.kind == TypeKind::Enum) {
        if (r.kind == ExprKind::BoolLit) return Type::function(dc->type.carrier, Type::boolean());
        const ConstantValue * rc = r.kind == ExprKind::Ident ? u_.constant(r.name) : nullptr;
        if (rc && (rc->type.kind == TypeKind::Enum || rc->type.kind == TypeKind::Bool)) {
          return Type::function(dc->type.carrier, rc->type);
        }
      }
    }
    fail(ErrorCode::TypeError, where(e) + "set literal needs a function type from context");
  }

  // {a |-> x, ...} against a total-function type.
  int map_literal(const Expr & e, const Type * expected, Type & out)
  {
    if (!expected || expected->kind != TypeKind::Function) {
      fail(ErrorCode::TypeError, where(e) + "set literal needs a function type from context");
    }
    const Type dom = Type::enumeration(expected->carrier);
    const Type rng = expected->range();
    Node n;
    n.op = Op::MapLit;
    n.src = &e;
    n.imm = u_.cardinality(dom);
    n.aux = u_.cardinality(rng);
    for (const auto & m : e.args) {
      if (m->kind != ExprKind::Maplet) fail(ErrorCode::TypeError, where(*m) + "maplet expected");
      n.kids.push_back(compile_as(*m->args[0], dom));
      n.kids.push_back(compile_as(*m->args[1], rng));
    }
    out = *expected;
    return emit(std::move(n));
  }

  Type set_as_type(const Expr & s)
  {
    if (s.kind == ExprKind::BoolSet) return Type::boolean();
    if (s.kind == ExprKind::NatSet) return Type::nat();
    if (s.kind == ExprKind::Ident && u_.is_set(s.name)) {
      u_.finite_carrier(s.name);
      return Type::enumeration(s.name);
    }
    fail(ErrorCode::TypeError, where(s) + "set expected");
  }

  int membership(const Expr & e, Type & out)
  {
    out = Type::boolean();
    const Expr & rhs = *e.args[1];
    Type lt;
    const int a = compile(*e.args[0], nullptr, lt);
    if (rhs.kind == ExprKind::SetLit) {
      std::vector<int> kids{a};
      for (const auto & x : rhs.args) kids.push_back(compile_as(*x, lt));
      return node(Op::MemberList, std::move(kids), e);
    }
    if (rhs.kind == ExprKind::TotalFn) {
      const Type dom = set_as_type(*rhs.args[0]);
      if (lt.kind != TypeKind::Function || dom.kind != TypeKind::Enum || lt.carrier != dom.carrier) {
        fail(ErrorCode::TypeError, where(e) + lt.to_string() + " is not a function on " + to_text(rhs.args[0]));
      }
      const Expr & r = *rhs.args[1];
      if (r.kind == ExprKind::SetLit) {
        Node n;
        n.op = Op::FnRange;
        n.src = &e;
        n.kids = {a};
        n.imm = u_.cardinality(dom);
        n.aux = u_.cardinality(lt.range());
        for (const auto & x : r.args) {
          const int k = compile_as(*x, lt.range());
          if (out_.nodes_[static_cast<size_t>(k)].op != Op::Lit) {
            fail(ErrorCode::TypeError, where(*x) + "range elements must be constants");
          }
          n.set.push_back(out_.nodes_[static_cast<size_t>(k)].imm);
        }
        return emit(std::move(n));
      }
      expect(e, lt.range(), set_as_type(r));
      return node(Op::MemberAll, {a}, e);
    }
    expect(e, lt, set_as_type(rhs));
    return node(Op::MemberAll, {a}, e);
  }

  int partition(const Expr & e, Type & out)
  {
    out = Type::boolean();
    if (e.args.empty() || e.args[0]->kind != ExprKind::Ident) {
      fail(ErrorCode::TypeError, where(e) + "partition needs a carrier set");
    }
    const Type set = set_as_type(*e.args[0]);
    Node n;
    n.op = Op::Partition;
    n.src = &e;
    n.imm = u_.cardinality(set);
    for (size_t i = 1; i < e.args.size(); ++i) {
      const Expr & block = *e.args[i];
      if (block.kind != ExprKind::SetLit || block.args.empty()) {
        fail(ErrorCode::TypeError, where(block) + "partition block must be a non-empty set literal");
      }
      for (const auto & x : block.args) n.kids.push_back(compile_as(*x, set));
    }
    return emit(std::move(n));
  }

  const Universe & u_;
  const std::map<std::string, int> & slots_;
  const std::vector<Type> & types_;
  Compiled out_;
};

// ---- evaluation ----------------------------------------------------------

bool Compiled::eval(const Value * state, Value & out, WdFailure * wd) const
{
  return eval_node(root_, state, out, wd);
}

bool Compiled::holds(const Value * state) const
{
  Value v = 0;
  return eval_node(root_, state, v, nullptr) && v != 0;
}

bool Compiled::eval_node(int idx, const Value * s, Value & out, WdFailure * wd) const
{
  const Node & n = nodes_[static_cast<size_t>(idx)];
  auto wd_fail = [&](WdReason r) {
    if (wd) *wd = WdFailure{n.src ? n.src->span : SourceSpan{}, r};
    return false;
  };
  Value a = 0;
  Value b = 0;
  switch (n.op) {
    case Op::Lit: out = n.imm; return true;
    case Op::Var: out = s[n.imm]; return true;
    case Op::And:
      if (!eval_node(n.kids[0], s, a, wd)) return false;
      if (!a) {
        out = 0;
        return true;
      }
      if (!eval_node(n.kids[1], s, b, wd)) return false;
      out = b != 0;
      return true;
    case Op::Or:
      if (!eval_node(n.kids[0], s, a, wd)) return false;
      if (a) {
        out = 1;
        return true;
      }
      if (!eval_node(n.kids[1], s, b, wd)) return false;
      out = b != 0;
      return true;
    case Op::Implies:
      if (!eval_node(n.kids[0], s, a, wd)) return false;
      if (!a) {
        out = 1;
        return true;
      }
      if (!eval_node(n.kids[1], s, b, wd)) return false;
      out = b != 0;
      return true;
    case Op::Not:
      if (!eval_node(n.kids[0], s, a, wd)) return false;
      out = !a;
      return true;
    case Op::MemberAll:
      if (!eval_node(n.kids[0], s, a, wd)) return false;
      out = 1;
      return true;
    case Op::MemberList:
      if (!eval_node(n.kids[0], s, a, wd)) return false;
      out = 0;
      for (size_t i = 1; i < n.kids.size(); ++i) {
        if (!eval_node(n.kids[i], s, b, wd)) return false;
        if (a == b) out = 1;
      }
      return true;
    case Op::FnRange:
      if (!eval_node(n.kids[0], s, a, wd)) return false;
      out = 1;
      for (int i = 0; i < n.imm; ++i) {
        const Value img = function_image(a, i, n.aux);
        if (std::find(n.set.begin(), n.set.end(), img) == n.set.end()) out = 0;
      }
      return true;
    case Op::MapLit: {
      std::vector<Value> image(static_cast<size_t>(n.imm), -1);
      for (size_t i = 0; i + 1 < n.kids.size(); i += 2) {
        if (!eval_node(n.kids[i], s, a, wd) || !eval_node(n.kids[i + 1], s, b, wd)) return false;
        auto & slot = image[static_cast<size_t>(a)];
        if (slot != -1 && slot != b) return wd_fail(WdReason::FunctionOutsideDomain);
        slot = b;
      }
      Value code = 0;
      for (size_t i = image.size(); i-- > 0;) {
        if (image[i] < 0) return wd_fail(WdReason::FunctionOutsideDomain);
        code = code * n.aux + image[i];
      }
      out = code;
      return true;
    }
    case Op::Partition: {
      std::vector<bool> seen(static_cast<size_t>(n.imm), false);
      out = static_cast<Value>(n.kids.size()) == n.imm;
      for (int k : n.kids) {
        if (!eval_node(k, s, a, wd)) return false;
        if (seen[static_cast<size_t>(a)]) out = 0;
        seen[static_cast<size_t>(a)] = true;
      }
      return true;
    }
    default: break;
  }
  if (!eval_node(n.kids[0], s, a, wd) || !eval_node(n.kids[1], s, b, wd)) return false;
  switch (n.op) {
    case Op::Add: out = a + b; return true;
    case Op::Sub:
      if (a < b) return wd_fail(WdReason::NaturalUnderflow);
      out = a - b;
      return true;
    case Op::Mul: out = a * b; return true;
    case Op::Div:
      if (b == 0) return wd_fail(WdReason::DivisionByZero);
      out = a / b;
      return true;
    case Op::Eq: out = a == b; return true;
    case Op::Neq: out = a != b; return true;
    case Op::Lt: out = a < b; return true;
    case Op::Le: out = a <= b; return true;
    case Op::Gt: out = a > b; return true;
    case Op::Ge: out = a >= b; return true;
    default: break;
  }
  return false;
}

// ---- universe ------------------------------------------------------------

const Carrier * Universe::carrier(const std::string & name) const
{
  auto it = carriers_.find(name);
  return it == carriers_.end() ? nullptr : &it->second;
}

const Carrier & Universe::finite_carrier(const std::string & name) const
{
  if (const auto * c = carrier(name)) return *c;
  if (is_set(name)) fail(ErrorCode::NonFiniteCarrier, name + " has no partition axiom");
  fail(ErrorCode::UnresolvedReference, "set " + name);
}

bool Universe::is_set(const std::string & name) const { return declared_sets_.count(name) > 0; }

const ConstantValue * Universe::constant(const std::string & name) const
{
  auto it = constants_.find(name);
  return it == constants_.end() ? nullptr : &it->second;
}

Value Universe::cardinality(const Type & t) const
{
  switch (t.kind) {
    case TypeKind::Bool: return 2;
    case TypeKind::Nat: return 0;
    case TypeKind::Enum: return static_cast<Value>(finite_carrier(t.carrier).elements.size());
    case TypeKind::Function: {
      const Value d = static_cast<Value>(finite_carrier(t.carrier).elements.size());
      const Value r = cardinality(t.range());
      Value n = 1;
      for (Value i = 0; i < d; ++i) n *= r;
      return n;
    }
  }
  return 0;
}

int Universe::element_index(const std::string & set, const std::string & element) const
{
  const auto * c = carrier(set);
  if (!c) return -1;
  auto it = std::find(c->elements.begin(), c->elements.end(), element);
  return it == c->elements.end() ? -1 : static_cast<int>(it - c->elements.begin());
}

std::string Universe::format(const Type & t, Value v) const
{
  switch (t.kind) {
    case TypeKind::Bool: return v ? "TRUE" : "FALSE";
    case TypeKind::Nat: return std::to_string(v);
    case TypeKind::Enum: {
      const auto & c = finite_carrier(t.carrier);
      if (v < 0 || v >= static_cast<Value>(c.elements.size())) return "?";
      return c.elements[static_cast<size_t>(v)];
    }
    case TypeKind::Function: {
      const auto & dom = finite_carrier(t.carrier);
      const Type r = t.range();
      const Value rs = cardinality(r);
      std::string out = "{";
      for (size_t i = 0; i < dom.elements.size(); ++i) {
        if (i) out += ", ";
        out += dom.elements[i] + " |-> " + format(r, function_image(v, static_cast<int>(i), rs));
      }
      return out + "}";
    }
  }
  return "?";
}

Universe Universe::build(const FlatContext & ctx, const CheckConfig & cfg)
{
  Universe u;
  for (const auto & s : ctx.sets) u.declared_sets_[s.name] = true;
  std::set<std::string> declared_constants;
  for (const auto & c : ctx.constants) declared_constants.insert(c.name);

  const auto active = ctx.active_axioms();
  std::map<std::string, std::string> element_set;
  for (const auto * a : active) {
    const Expr & b = *a->pred.body;
    if (b.kind != ExprKind::Partition || b.args.empty() || b.args[0]->kind != ExprKind::Ident) continue;
    const std::string & set = b.args[0]->name;
    if (!u.is_set(set)) continue;
    if (u.carriers_.count(set)) fail(ErrorCode::TypeError, set + " is partitioned twice (" + a->pred.label + ")");
    Carrier c{set, {}};
    for (size_t i = 1; i < b.args.size(); ++i) {
      const Expr & block = *b.args[i];
      if (block.kind != ExprKind::SetLit) continue;
      for (const auto & x : block.args) {
        if (x->kind != ExprKind::Ident || !declared_constants.count(x->name)) {
          fail(ErrorCode::TypeError, where(*x) + "partition element must be a declared constant");
        }
        auto [it, fresh] = element_set.emplace(x->name, set);
        if (!fresh) {
          fail(ErrorCode::TypeError, x->name + " is an element of both " + it->second + " and " + set);
        }
        c.elements.push_back(x->name);
      }
    }
    u.carriers_[set] = std::move(c);
  }
  for (const auto & [name, set] : element_set) {
    u.constants_[name] = {Type::enumeration(set), u.element_index(set, name)};
  }

  // Remaining constants are typed by a membership axiom.
  for (const auto & name : declared_constants) {
    if (u.constants_.count(name)) continue;
    const Expr * typing = nullptr;
    for (const auto * a : active) {
      const Expr & b = *a->pred.body;
      if (b.kind == ExprKind::Member && b.args[0]->kind == ExprKind::Ident && b.args[0]->name == name) {
        typing = b.args[1].get();
        break;
      }
    }
    if (!typing) fail(ErrorCode::TypeError, "constant " + name + " has no typing axiom");
    auto configured = cfg.constants.find(name);
    if (typing->kind == ExprKind::NatSet) {
      Value v = 0;
      if (configured == cfg.constants.end() || !parse_nat(configured->second, v)) {
        fail(ErrorCode::TypeError, "constant " + name + " needs a natural value in the configuration");
      }
      u.constants_[name] = {Type::nat(), v};
    } else if (typing->kind == ExprKind::BoolSet) {
      if (configured == cfg.constants.end() || (configured->second != "TRUE" && configured->second != "FALSE")) {
        fail(ErrorCode::TypeError, "constant " + name + " needs TRUE or FALSE in the configuration");
      }
      u.constants_[name] = {Type::boolean(), configured->second == "TRUE" ? 1 : 0};
    } else if (typing->kind == ExprKind::Ident && u.is_set(typing->name)) {
      const int idx =
        configured == cfg.constants.end() ? -1 : u.element_index(typing->name, configured->second);
      if (idx < 0) fail(ErrorCode::TypeError, "constant " + name + " needs an element of " + typing->name);
      u.constants_[name] = {Type::enumeration(typing->name), idx};
    } else if (
      typing->kind == ExprKind::TotalFn && typing->args[0]->kind == ExprKind::Ident &&
      typing->args[1]->kind == ExprKind::SetLit && typing->args[1]->args.size() == 1 &&
      typing->args[1]->args[0]->kind == ExprKind::Ident) {
      // A function into a one-element set has exactly one value.
      const std::string & dom = typing->args[0]->name;
      const auto * img = u.constant(typing->args[1]->args[0]->name);
      if (!img || img->type.kind != TypeKind::Enum) {
        fail(ErrorCode::TypeError, where(*typing) + "range element must be an enumerated constant");
      }
      const Type t = Type::function(dom, img->type);
      const Value d = static_cast<Value>(u.finite_carrier(dom).elements.size());
      const Value r = u.cardinality(img->type);
      Value code = 0;
      for (Value i = 0; i < d; ++i) code = code * r + img->value;
      u.constants_[name] = {t, code};
    } else {
      fail(ErrorCode::TypeError, where(*typing) + "unsupported typing for constant " + name);
    }
  }

  // Every active axiom must hold under the valuation.
  const std::map<std::string, int> no_slots;
  const std::vector<Type> no_types;
  for (const auto * a : active) {
    Compiler c(u, no_slots, no_types);
    const Compiled code = c.predicate(a->pred.body);
    Value v = 0;
    WdFailure wd;
    if (!code.eval(nullptr, v, &wd)) {
      fail(ErrorCode::AxiomViolation, a->origin + "." + a->pred.label + " is not well defined: " + wd.message());
    }
    if (!v) fail(ErrorCode::AxiomViolation, a->origin + "." + a->pred.label + " is false");
  }
  return u;
}

// ---- typing --------------------------------------------------------------

bool is_typing_invariant(const LabeledPredicate & p, const FlatMachine & m)
{
  const Expr & b = *p.body;
  if (b.kind != ExprKind::Member || b.args[0]->kind != ExprKind::Ident) return false;
  if (!m.has_variable(b.args[0]->name)) return false;
  const Expr & t = *b.args[1];
  switch (t.kind) {
    case ExprKind::BoolSet:
    case ExprKind::NatSet: return true;
    case ExprKind::Ident: return m.context.has_set(t.name);
    case ExprKind::TotalFn:
      return t.args[0]->kind == ExprKind::Ident &&
             (t.args[1]->kind == ExprKind::Ident || t.args[1]->kind == ExprKind::BoolSet);
    default: return false;
  }
}

std::map<std::string, Type> infer_types(const FlatMachine & m, const Universe & u)
{
  std::map<std::string, Type> out;
  for (const auto & inv : m.invariants) {
    if (!is_typing_invariant(inv, m)) continue;
    const Expr & b = *inv.body;
    const std::string & v = b.args[0]->name;
    const Expr & t = *b.args[1];
    Type ty;
    if (t.kind == ExprKind::BoolSet) {
      ty = Type::boolean();
    } else if (t.kind == ExprKind::NatSet) {
      ty = Type::nat();
    } else if (t.kind == ExprKind::Ident) {
      u.finite_carrier(t.name);
      ty = Type::enumeration(t.name);
    } else {
      const Expr & dom = *t.args[0];
      const Expr & rng = *t.args[1];
      if (!u.is_set(dom.name)) fail(ErrorCode::TypeError, where(dom) + dom.name + " is not a set");
      u.finite_carrier(dom.name);
      Type range = Type::boolean();
      if (rng.kind == ExprKind::Ident) {
        if (!u.is_set(rng.name)) fail(ErrorCode::TypeError, where(rng) + rng.name + " is not a set");
        u.finite_carrier(rng.name);
        range = Type::enumeration(rng.name);
      }
      ty = Type::function(dom.name, range);
    }
    if (out.count(v)) fail(ErrorCode::TypeError, "conflicting typings for " + v + " (" + inv.label + ")");
    out[v] = ty;
  }
  for (const auto & v : m.variables) {
    if (!out.count(v)) fail(ErrorCode::TypeError, "variable " + v + " of " + m.name + " has no typing invariant");
  }
  return out;
}

// ---- model ---------------------------------------------------------------

Model::Model(FlatMachine m, Universe u, CheckConfig cfg)
: machine_(std::move(m)), universe_(std::move(u)), config_(std::move(cfg))
{
}

std::shared_ptr<const Model> Model::build(const Project & p, const std::string & machine, const CheckConfig & cfg)
{
  return build(flatten_machine(p, machine), cfg);
}

std::shared_ptr<const Model> Model::build(const FlatMachine & fm, const CheckConfig & cfg)
{
  std::shared_ptr<Model> m(new Model(fm, Universe::build(fm.context, cfg), cfg));
  const auto types = infer_types(m->machine_, m->universe_);
  for (const auto & v : m->machine_.variables) {
    if (m->universe_.constant(v) || m->universe_.is_set(v)) {
      fail(ErrorCode::DuplicateName, "variable " + v + " shadows a context name");
    }
    const Type & t = types.at(v);
    Bound r{0, 0};
    if (t.kind == TypeKind::Nat) {
      auto it = cfg.bounds.find(v);
      if (it == cfg.bounds.end()) fail(ErrorCode::MissingBound, "no bound for NAT variable " + v);
      r = it->second;
      if (r.lo < 0 || r.lo > r.hi) {
        fail(ErrorCode::InvalidBound, v + " bound " + std::to_string(r.lo) + ".." + std::to_string(r.hi));
      }
    } else {
      r.hi = m->universe_.cardinality(t) - 1;
    }
    m->slots_[v] = static_cast<int>(m->variables_.size());
    m->variables_.push_back(v);
    m->types_.push_back(t);
    m->ranges_.push_back(r);
  }
  for (const auto & inv : m->machine_.invariants) {
    m->invariants_.push_back({inv.label, inv.body, m->compile_predicate(inv.body)});
  }
  for (const auto & e : m->machine_.events) {
    if (e.is_initialisation()) {
      m->init_ = m->compile_event(e);
    } else {
      m->events_.push_back(m->compile_event(e));
    }
  }
  return m;
}

int Model::slot(const std::string & variable) const
{
  auto it = slots_.find(variable);
  return it == slots_.end() ? -1 : it->second;
}

Bound Model::range(int s) const { return ranges_[static_cast<size_t>(s)]; }

bool Model::in_bounds(const State & s) const
{
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] < ranges_[i].lo || s[i] > ranges_[i].hi) return false;
  }
  return true;
}

int Model::event_index(const std::string & name) const
{
  for (size_t i = 0; i < events_.size(); ++i) {
    if (events_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const CompiledEvent * Model::find_event(const std::string & name) const
{
  if (name == kInitialisation) return &init_;
  const int i = event_index(name);
  return i < 0 ? nullptr : &events_[static_cast<size_t>(i)];
}

Compiled Model::compile_predicate(const ExprPtr & e) const
{
  return Compiler(universe_, slots_, types_).predicate(e);
}

Compiled Model::compile_value(const ExprPtr & e, const Type & expected) const
{
  return Compiler(universe_, slots_, types_).value(e, expected);
}

CompiledEvent Model::compile_event(const EventDef & e) const
{
  CompiledEvent out;
  out.def = &e;
  out.name = e.name;
  out.environment = e.is_environment();
  for (const auto & g : e.guards) out.guards.push_back({g.label, g.body, compile_predicate(g.body)});
  for (const auto & a : e.actions) {
    const int s = slot(a.variable);
    if (s < 0) fail(ErrorCode::UnknownVariable, a.variable + " in " + e.name);
    out.actions.push_back({a.label, a.variable, s, compile_value(a.value, types_[static_cast<size_t>(s)])});
  }
  return out;
}

State Model::initial_state() const
{
  State empty(variables_.size(), 0);
  return apply(init_, empty);
}

bool Model::enabled(const CompiledEvent & e, const State & s, std::vector<std::string> * failing,
                    std::vector<WdFailure> * warnings) const
{
  bool ok = true;
  for (const auto & g : e.guards) {
    Value v = 0;
    WdFailure wd;
    if (!g.code.eval(s.data(), v, &wd)) {
      if (warnings) warnings->push_back(wd);
      v = 0;
    }
    if (!v) {
      ok = false;
      if (!failing) return false;
      failing->push_back(g.label);
    }
  }
  return ok;
}

std::vector<std::string> Model::enabled_events(const State & s, std::vector<WdFailure> * warnings) const
{
  std::vector<std::string> out;
  for (const auto & e : events_) {
    if (enabled(e, s, nullptr, warnings)) out.push_back(e.name);
  }
  return out;
}

State Model::apply(const CompiledEvent & e, const State & s) const
{
  State next = s;
  for (const auto & a : e.actions) {
    Value v = 0;
    WdFailure wd;
    if (!a.code.eval(s.data(), v, &wd)) {
      fail(ErrorCode::WellDefinedness, e.name + "." + a.label + ": " + wd.message());
    }
    next[static_cast<size_t>(a.slot)] = v;
  }
  return next;
}

State Model::fire(const CompiledEvent & e, const State & s) const
{
  std::vector<std::string> failing;
  if (!enabled(e, s, &failing)) {
    std::string labels;
    for (const auto & l : failing) labels += (labels.empty() ? "" : ", ") + l;
    fail(ErrorCode::GuardNotEnabled, e.name + " (" + labels + ")");
  }
  return apply(e, s);
}

State Model::fire(const std::string & event, const State & s) const
{
  const auto * e = find_event(event);
  if (!e) fail(ErrorCode::UnknownEvent, event + " in " + name());
  return fire(*e, s);
}

std::vector<std::string> Model::violated_invariants(const State & s) const
{
  std::vector<std::string> out;
  for (const auto & inv : invariants_) {
    if (!inv.code.holds(s.data())) out.push_back(inv.label);
  }
  return out;
}

std::string Model::format(int s, Value v) const { return universe_.format(types_[static_cast<size_t>(s)], v); }

std::string Model::describe(const State & s) const
{
  std::ostringstream os;
  for (size_t i = 0; i < variables_.size(); ++i) {
    if (i) os << ", ";
    os << variables_[i] << " = " << format(static_cast<int>(i), s[i]);
  }
  return os.str();
}

Value Model::parse_value(const std::string & variable, const std::string & text, const State & s) const
{
  const int sl = slot(variable);
  if (sl < 0) fail(ErrorCode::UnknownVariable, variable + " in " + name());
  std::vector<ParseError> errors;
  auto e = parse_expression(text, errors);
  if (!errors.empty()) fail(ErrorCode::TypeMismatch, errors.front().message());
  const Type & t = types_[static_cast<size_t>(sl)];
  Compiled c;
  try {
    c = compile_value(e, t);
  } catch (const ModelError & err) {
    fail(ErrorCode::TypeMismatch, variable + " : " + t.to_string() + ", " + err.what());
  }
  Value v = 0;
  WdFailure wd;
  if (!c.eval(s.data(), v, &wd)) fail(ErrorCode::TypeMismatch, wd.message());
  const Bound r = ranges_[static_cast<size_t>(sl)];
  if (v < r.lo || v > r.hi) {
    fail(ErrorCode::OutOfBounds,
         variable + " = " + std::to_string(v) + " outside " + std::to_string(r.lo) + ".." + std::to_string(r.hi));
  }
  return v;
}

}  // namespace evb
