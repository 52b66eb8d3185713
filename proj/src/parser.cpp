// evb/parser.cpp - lexer and recursive-descent parser for the model DSL
#include "evb/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "evb/errors.hpp"

namespace evb
{

std::string ParseError::message() const
{
  std::ostringstream os;
  os << span.to_string() << ": expected " << expected << ", found ";
  if (found.empty()) {
    os << "end of input";
  } else {
    os << '\'' << found << '\'';
  }
  return os.str();
}

namespace
{

enum class Tok {
  Ident,
  Int,
  Sym,
  End,
  Bad,
};

struct Token
{
  Tok kind;
  std::string text;
  SourcePos start;
  SourcePos end;
};

constexpr size_t kMaxDigits = 15;
constexpr int kMaxDepth = 200;

class Lexer
{
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run()
  {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      if (pos_ >= text_.size()) {
        out.push_back(Token{Tok::End, "", here(), here()});
        return out;
      }
      out.push_back(next());
    }
  }

private:
  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  SourcePos here() const { return SourcePos{line_, col_}; }

  void advance()
  {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments()
  {
    while (pos_ < text_.size()) {
      const auto c = static_cast<unsigned char>(text_[pos_]);
      if (std::isspace(c)) {
        advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  Token next()
  {
    const SourcePos start = here();
    const auto c = static_cast<unsigned char>(text_[pos_]);
    if (std::isalpha(c) || c == '_') {
      const size_t b = pos_;
      while (pos_ < text_.size()) {
        const auto d = static_cast<unsigned char>(text_[pos_]);
        if (!std::isalnum(d) && d != '_') break;
        advance();
      }
      return Token{Tok::Ident, std::string(text_.substr(b, pos_ - b)), start, here()};
    }
    if (std::isdigit(c)) {
      const size_t b = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      }
      auto s = std::string(text_.substr(b, pos_ - b));
      return Token{s.size() > kMaxDigits ? Tok::Bad : Tok::Int, s, start, here()};
    }
    static const char * const symbols[] = {
      "-->", "|->", ":=", "=>", "/=", "<=", ">=", "&", "|", "=", "<", ">",
      "+",   "-",   "*",  "/",  ":",  "{",  "}",  "(", ")", ",",
    };
    for (const char * s : symbols) {
      const std::string_view sv(s);
      if (text_.substr(pos_, sv.size()) == sv) {
        for (size_t i = 0; i < sv.size(); ++i) advance();
        return Token{Tok::Sym, std::string(sv), start, here()};
      }
    }
    // Anything else is one bad byte; reported by the parser.
    std::string bad(1, static_cast<char>(c));
    advance();
    return Token{Tok::Bad, bad, start, here()};
  }
};

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) {
    return static_cast<char>(std::tolower(ch));
  });
  return s;
}

const std::set<std::string> & section_keywords()
{
  static const std::set<std::string> k = {
    "MACHINE",   "CONTEXT",  "EXTENDS",    "REFINES", "SEES",   "SETS",
    "CONSTANTS", "AXIOMS",   "THEOREMS",   "VARIABLES", "INVARIANTS", "VARIANT",
    "EVENTS",
  };
  return k;
}

const std::set<std::string> & expression_keywords()
{
  static const std::set<std::string> k = {
    "partition", "BOOL", "NAT", "TRUE", "FALSE", "not", "or", "environment", "convergent",
  };
  return k;
}

// Event/Where/Then/End are matched case-insensitively (the listings mix
// "Then" with "THEN" and "End" with "END").
bool is_block_word(const std::string & s)
{
  const auto l = lower(s);
  return l == "event" || l == "where" || l == "then" || l == "end";
}

bool is_reserved(const std::string & s)
{
  return section_keywords().count(s) || expression_keywords().count(s) || is_block_word(s);
}

std::string normalize_event_name(const std::string & n)
{
  const auto l = lower(n);
  if (l == "initialisation" || l == "initialization") return kInitialisation;
  return n;
}

struct Failure
{
  ParseError error;
};

class Parser
{
public:
  Parser(std::vector<Token> toks, std::string file) : toks_(std::move(toks)), file_(std::move(file))
  {
  }

  ParseResult parse_all()
  {
    ParseResult r;
    while (!at_end()) {
      try {
        if (is_word("CONTEXT")) {
          r.units.emplace_back(parse_context());
        } else if (is_word("MACHINE")) {
          r.units.emplace_back(parse_machine());
        } else {
          fail("CONTEXT or MACHINE");
        }
      } catch (const Failure & f) {
        r.errors.push_back(f.error);
        recover();
      }
    }
    return r;
  }

  ExprPtr parse_standalone()
  {
    auto e = parse_predicate();
    if (!at_end()) fail("end of expression");
    return e;
  }

private:
  std::vector<Token> toks_;
  std::string file_;
  size_t i_ = 0;
  int depth_ = 0;

  const Token & peek(size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  const Token & take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  SourceSpan span_of(const Token & a, const Token & b) const
  {
    return SourceSpan{file_, a.start, b.end};
  }
  SourceSpan span_from(size_t first) const
  {
    const size_t last = i_ > first ? i_ - 1 : first;
    return span_of(toks_[first], toks_[std::min(last, toks_.size() - 1)]);
  }

  [[noreturn]] void fail(const std::string & expected) const
  {
    const auto & t = peek();
    throw Failure{ParseError{span_of(t, t), expected, t.text}};
  }

  bool is_word(const char * w) const { return peek().kind == Tok::Ident && peek().text == w; }
  bool is_block(const char * w) const
  {
    return peek().kind == Tok::Ident && lower(peek().text) == w;
  }
  bool is_sym(const char * s) const { return peek().kind == Tok::Sym && peek().text == s; }

  void expect_word(const char * w)
  {
    if (!is_word(w)) fail(std::string("'") + w + "'");
    take();
  }
  void expect_sym(const char * s)
  {
    if (!is_sym(s)) fail(std::string("'") + s + "'");
    take();
  }

  std::string expect_identifier()
  {
    if (peek().kind != Tok::Ident || is_reserved(peek().text)) fail("identifier");
    return take().text;
  }

  std::vector<std::string> identifier_list()
  {
    std::vector<std::string> out;
    out.push_back(expect_identifier());
    while (is_sym(",")) {
      take();
      out.push_back(expect_identifier());
    }
    return out;
  }

  // Skip to the next top-level block after an error.
  void recover()
  {
    if (!at_end()) take();
    while (!at_end() && !is_word("MACHINE") && !is_word("CONTEXT")) take();
  }

  bool at_section_boundary() const
  {
    if (at_end()) return true;
    const auto & t = peek();
    return t.kind == Tok::Ident && (section_keywords().count(t.text) || is_block_word(t.text));
  }

  std::vector<LabeledPredicate> labeled_predicates(std::set<std::string> & labels)
  {
    std::vector<LabeledPredicate> out;
    while (!at_section_boundary()) {
      const size_t first = i_;
      const auto label_tok = peek();
      auto label = expect_identifier();
      if (!labels.insert(label).second) {
        throw Failure{ParseError{span_of(label_tok, label_tok), "unique label", label}};
      }
      auto body = parse_predicate();
      out.push_back(LabeledPredicate{std::move(label), std::move(body), span_from(first)});
    }
    return out;
  }

  void end_block()
  {
    if (!is_block("end")) fail("'END'");
    take();
  }

  ContextDef parse_context()
  {
    const size_t first = i_;
    expect_word("CONTEXT");
    ContextDef c;
    c.name = expect_identifier();
    std::set<std::string> labels;
    if (is_word("EXTENDS")) {
      take();
      c.extends = identifier_list();
    }
    if (is_word("SETS")) {
      take();
      c.sets = identifier_list();
    }
    if (is_word("CONSTANTS")) {
      take();
      c.constants = identifier_list();
    }
    if (is_word("AXIOMS")) {
      take();
      c.axioms = labeled_predicates(labels);
    }
    if (is_word("THEOREMS")) {
      take();
      c.theorems = labeled_predicates(labels);
    }
    end_block();
    c.span = span_from(first);
    return c;
  }

  MachineDef parse_machine()
  {
    const size_t first = i_;
    expect_word("MACHINE");
    MachineDef m;
    m.name = expect_identifier();
    std::set<std::string> labels;
    if (is_word("REFINES")) {
      take();
      m.refines = expect_identifier();
    }
    if (is_word("SEES")) {
      take();
      m.sees = identifier_list();
    }
    if (is_word("VARIABLES")) {
      take();
      m.variables = identifier_list();
    }
    if (is_word("INVARIANTS")) {
      take();
      m.invariants = labeled_predicates(labels);
    }
    if (is_word("THEOREMS")) {
      take();
      m.theorems = labeled_predicates(labels);
    }
    if (is_word("VARIANT")) {
      take();
      m.variant = parse_expr();
    }
    if (is_word("EVENTS")) {
      take();
      std::set<std::string> names;
      while (is_block("event")) {
        const auto name_tok = peek(1);
        auto ev = parse_event();
        if (!names.insert(ev.name).second) {
          throw Failure{ParseError{span_of(name_tok, name_tok), "unique event name", ev.name}};
        }
        m.events.push_back(std::move(ev));
      }
    }
    end_block();
    m.span = span_from(first);
    return m;
  }

  EventDef parse_event()
  {
    const size_t first = i_;
    take();  // Event
    EventDef e;
    if (is_word("environment")) {
      take();
      e.kind = EventKind::Environment;
    }
    if (is_word("convergent")) {
      take();
      e.convergent = true;
    }
    e.name = normalize_event_name(expect_identifier());
    if (is_word("REFINES")) {
      take();
      e.refines = identifier_list();
    }
    std::set<std::string> labels;
    if (is_block("where")) {
      take();
      e.guards = labeled_predicates(labels);
    }
    if (is_block("then")) {
      take();
      while (!at_section_boundary()) {
        const size_t a_first = i_;
        const auto label_tok = peek();
        Assignment a;
        a.label = expect_identifier();
        if (!labels.insert(a.label).second) {
          throw Failure{ParseError{span_of(label_tok, label_tok), "unique label", a.label}};
        }
        a.variable = expect_identifier();
        expect_sym(":=");
        a.value = parse_expr();
        a.span = span_from(a_first);
        e.actions.push_back(std::move(a));
      }
    }
    end_block();
    e.span = span_from(first);
    return e;
  }

  // ---- expressions -------------------------------------------------------

  struct DepthGuard
  {
    Parser & p;
    explicit DepthGuard(Parser & parser) : p(parser)
    {
      if (++p.depth_ > kMaxDepth) p.fail("shallower nesting");
    }
    ~DepthGuard() { --p.depth_; }
  };

  ExprPtr binary(ExprKind k, ExprPtr l, ExprPtr r)
  {
    SourceSpan s{file_, l->span.start, r->span.end};
    return Expr::make(k, {std::move(l), std::move(r)}, std::move(s));
  }

  ExprPtr parse_predicate()
  {
    DepthGuard g(*this);
    auto lhs = parse_or();
    if (is_sym("=>")) {
      take();
      auto rhs = parse_predicate();  // right associative
      return binary(ExprKind::Implies, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_or()
  {
    auto lhs = parse_and();
    while (is_sym("|") || is_word("or")) {
      take();
      lhs = binary(ExprKind::Or, std::move(lhs), parse_and());
    }
    return lhs;
  }

  ExprPtr parse_and()
  {
    auto lhs = parse_not();
    while (is_sym("&")) {
      take();
      lhs = binary(ExprKind::And, std::move(lhs), parse_not());
    }
    return lhs;
  }

  ExprPtr parse_not()
  {
    DepthGuard g(*this);
    if (is_word("not")) {
      const size_t first = i_;
      take();
      auto inner = parse_not();
      return Expr::make(ExprKind::Not, {std::move(inner)}, span_from(first));
    }
    return parse_relation();
  }

  ExprPtr parse_relation()
  {
    auto lhs = parse_expr();
    static const std::pair<const char *, ExprKind> ops[] = {
      {"=", ExprKind::Eq},  {"/=", ExprKind::Neq}, {"<", ExprKind::Lt},     {"<=", ExprKind::Le},
      {">", ExprKind::Gt},  {">=", ExprKind::Ge},  {":", ExprKind::Member},
    };
    for (const auto & [sym, kind] : ops) {
      if (is_sym(sym)) {
        take();
        return binary(kind, std::move(lhs), parse_expr());
      }
    }
    return lhs;
  }

  // Set-valued and arithmetic expressions.
  ExprPtr parse_expr()
  {
    DepthGuard g(*this);
    auto lhs = parse_maplet();
    if (is_sym("-->")) {
      take();
      return binary(ExprKind::TotalFn, std::move(lhs), parse_maplet());
    }
    return lhs;
  }

  ExprPtr parse_maplet()
  {
    auto lhs = parse_additive();
    while (is_sym("|->")) {
      take();
      lhs = binary(ExprKind::Maplet, std::move(lhs), parse_additive());
    }
    return lhs;
  }

  ExprPtr parse_additive()
  {
    auto lhs = parse_multiplicative();
    for (;;) {
      if (is_sym("+")) {
        take();
        lhs = binary(ExprKind::Add, std::move(lhs), parse_multiplicative());
      } else if (is_sym("-")) {
        take();
        lhs = binary(ExprKind::Sub, std::move(lhs), parse_multiplicative());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_multiplicative()
  {
    auto lhs = parse_primary();
    for (;;) {
      if (is_sym("*")) {
        take();
        lhs = binary(ExprKind::Mul, std::move(lhs), parse_primary());
      } else if (is_sym("/")) {
        take();
        lhs = binary(ExprKind::Div, std::move(lhs), parse_primary());
      } else {
        return lhs;
      }
    }
  }

  std::vector<ExprPtr> expr_list(const char * close)
  {
    std::vector<ExprPtr> items;
    if (is_sym(close)) return items;
    items.push_back(parse_expr());
    while (is_sym(",")) {
      take();
      items.push_back(parse_expr());
    }
    return items;
  }

  ExprPtr parse_primary()
  {
    DepthGuard g(*this);
    const size_t first = i_;
    const auto & t = peek();
    if (t.kind == Tok::Int) {
      const auto v = std::stoll(take().text);
      return Expr::make_int(v, span_from(first));
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "TRUE" || t.text == "FALSE") {
        const bool v = take().text == "TRUE";
        return Expr::make_bool(v, span_from(first));
      }
      if (t.text == "BOOL") {
        take();
        return Expr::make(ExprKind::BoolSet, {}, span_from(first));
      }
      if (t.text == "NAT") {
        take();
        return Expr::make(ExprKind::NatSet, {}, span_from(first));
      }
      if (t.text == "partition") {
        take();
        expect_sym("(");
        auto items = expr_list(")");
        if (items.empty()) fail("partition arguments");
        expect_sym(")");
        return Expr::make(ExprKind::Partition, std::move(items), span_from(first));
      }
      auto name = expect_identifier();
      return Expr::make_ident(std::move(name), span_from(first));
    }
    if (is_sym("(")) {
      take();
      auto inner = parse_predicate();
      expect_sym(")");
      return inner;
    }
    if (is_sym("{")) {
      take();
      auto items = expr_list("}");
      expect_sym("}");
      return Expr::make(ExprKind::SetLit, std::move(items), span_from(first));
    }
    fail("expression");
  }
};

}  // namespace

ParseResult parse_source(std::string_view text, const std::string & file)
{
  Parser p(Lexer(text).run(), file);
  return p.parse_all();
}

ExprPtr parse_expression(std::string_view text, std::vector<ParseError> & errors, const std::string & file)
{
  Parser p(Lexer(text).run(), file);
  try {
    return p.parse_standalone();
  } catch (const Failure & f) {
    errors.push_back(f.error);
    return nullptr;
  }
}

std::vector<Unit> parse_or_throw(std::string_view text, const std::string & file)
{
  auto r = parse_source(text, file);
  if (!r.ok()) throw ModelError(ErrorCode::MalformedDefinition, r.errors.front().message());
  return std::move(r.units);
}

}  // namespace evb
