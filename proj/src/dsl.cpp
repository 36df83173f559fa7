#include "treerec/dsl.hpp"

#include <cctype>
#include <cstdio>
#include <span>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace treerec {

namespace {

struct Token {
  enum class Kind { Ident, Number, Punct, End } kind;
  std::string text;
  double number = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.col, msg);
  }

 private:
  void advance() {
    skip_space();
    tok_.line = line_;
    tok_.col = col_;
    if (at_ >= text_.size()) {
      tok_ = {Token::Kind::End, "", 0.0, line_, col_};
      return;
    }
    char c = text_[at_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = at_;
      while (at_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[at_])) || text_[at_] == '_'))
        bump();
      tok_ = {Token::Kind::Ident, text_.substr(start, at_ - start), 0.0, tok_.line, tok_.col};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && at_ + 1 < text_.size() &&
         std::isdigit(static_cast<unsigned char>(text_[at_ + 1])))) {
      std::size_t start = at_;
      if (c == '-') bump();
      while (at_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[at_])) || text_[at_] == '.' ||
              text_[at_] == 'e' || text_[at_] == 'E' ||
              ((text_[at_] == '+' || text_[at_] == '-') && at_ > start &&
               (text_[at_ - 1] == 'e' || text_[at_ - 1] == 'E'))))
        bump();
      std::string num = text_.substr(start, at_ - start);
      double value = std::stod(num);
      if (at_ < text_.size() && text_[at_] == '/') {  // fraction
        bump();
        std::size_t dstart = at_;
        while (at_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[at_])))
          bump();
        if (dstart == at_) throw ParseError(line_, col_, "expected a denominator");
        value /= std::stod(text_.substr(dstart, at_ - dstart));
        num = text_.substr(start, at_ - start);
      }
      tok_ = {Token::Kind::Number, num, value, tok_.line, tok_.col};
      return;
    }
    bump();
    tok_ = {Token::Kind::Punct, std::string(1, c), 0.0, tok_.line, tok_.col};
  }

  void skip_space() {
    while (at_ < text_.size()) {
      char c = text_[at_];
      if (c == '#') {
        while (at_ < text_.size() && text_[at_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (text_[at_] == '\n') {
      line_++;
      col_ = 1;
    } else {
      col_++;
    }
    at_++;
  }

  const std::string& text_;
  std::size_t at_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

struct RawEquation {
  std::string head;
  std::vector<std::string> vars;
  int line, col;
  // rhs as an uninterpreted tree of names, resolved once signatures are known
  struct Node {
    std::string name;
    bool applied = false;  // whether "(...)" was written
    std::vector<Node> args;
    int line, col;
  };
  Node rhs;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  SchemeFile run() {
    std::vector<std::pair<std::string, std::uint32_t>> givens, unknowns;
    std::vector<RawEquation> equations;
    std::optional<AlgebraSpec> algebra;

    while (lex_.peek().kind != Token::Kind::End) {
      Token t = lex_.peek();
      if (t.kind != Token::Kind::Ident) lex_.fail("expected a statement");
      if (t.text == "given" || t.text == "unknown") {
        lex_.take();
        auto& into = t.text == "given" ? givens : unknowns;
        for (;;) {
          Token name = expect_ident("symbol name");
          expect_punct(":");
          Token ar = lex_.take();
          if (ar.kind != Token::Kind::Number || ar.text.find_first_not_of("0123456789") !=
                                                    std::string::npos)
            throw ParseError(ar.line, ar.col, "expected a non-negative arity");
          into.emplace_back(name.text, static_cast<std::uint32_t>(ar.number));
          if (!try_punct(",")) break;
        }
        expect_punct(";");
      } else if (t.text == "algebra") {
        if (algebra)
          throw ParseError(t.line, t.col, "a file declares at most one algebra");
        lex_.take();
        algebra = parse_algebra();
        expect_punct(";");
      } else {
        equations.push_back(parse_equation());
        expect_punct(";");
      }
    }
    return assemble(std::move(givens), std::move(unknowns), std::move(equations),
                    std::move(algebra));
  }

 private:
  Token expect_ident(const std::string& what) {
    Token t = lex_.take();
    if (t.kind != Token::Kind::Ident)
      throw ParseError(t.line, t.col, "expected " + what);
    return t;
  }

  void expect_punct(const std::string& p) {
    Token t = lex_.take();
    if (t.kind != Token::Kind::Punct || t.text != p)
      throw ParseError(t.line, t.col, "expected '" + p + "'");
  }

  bool try_punct(const std::string& p) {
    if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p) {
      lex_.take();
      return true;
    }
    return false;
  }

  RawEquation parse_equation() {
    RawEquation eq;
    Token head = expect_ident("an equation head");
    eq.head = head.text;
    eq.line = head.line;
    eq.col = head.col;
    if (try_punct("(")) {
      if (!try_punct(")")) {
        for (;;) {
          eq.vars.push_back(expect_ident("a variable name").text);
          if (!try_punct(",")) break;
        }
        expect_punct(")");
      }
    }
    expect_punct("=");
    eq.rhs = parse_term();
    return eq;
  }

  RawEquation::Node parse_term() {
    Token name = expect_ident("a term");
    RawEquation::Node n;
    n.name = name.text;
    n.line = name.line;
    n.col = name.col;
    if (try_punct("(")) {
      n.applied = true;
      if (!try_punct(")")) {
        for (;;) {
          n.args.push_back(parse_term());
          if (!try_punct(",")) break;
        }
        expect_punct(")");
      }
    }
    return n;
  }

  AlgebraSpec parse_algebra() {
    AlgebraSpec spec;
    spec.name = expect_ident("an algebra name").text;
    if (!try_punct("(")) return spec;
    if (try_punct(")")) return spec;
    for (;;) {
      Token t = lex_.peek();
      if (t.kind == Token::Kind::Punct && t.text == "(") {
        lex_.take();
        std::vector<double> tuple;
        for (;;) {
          Token num = lex_.take();
          if (num.kind != Token::Kind::Number)
            throw ParseError(num.line, num.col, "expected a number");
          tuple.push_back(num.number);
          if (!try_punct(",")) break;
        }
        expect_punct(")");
        spec.tuples.push_back(std::move(tuple));
      } else if (t.kind == Token::Kind::Number) {
        spec.numbers.push_back(lex_.take().number);
      } else if (t.kind == Token::Kind::Ident) {
        Token key = lex_.take();
        if (try_punct("=")) {
          Token val = lex_.take();
          if (val.kind != Token::Kind::Ident && val.kind != Token::Kind::Number)
            throw ParseError(val.line, val.col, "expected a value");
          spec.kv[key.text] = val.text;
        } else {
          spec.kv[key.text] = "";
        }
      } else {
        throw ParseError(t.line, t.col, "unexpected algebra argument");
      }
      if (!try_punct(",")) break;
    }
    expect_punct(")");
    return spec;
  }

  SchemeFile assemble(std::vector<std::pair<std::string, std::uint32_t>> givens,
                      std::vector<std::pair<std::string, std::uint32_t>> unknowns,
                      std::vector<RawEquation> equations,
                      std::optional<AlgebraSpec> algebra) {
    std::unordered_set<std::string> given_names;
    for (const auto& [n, a] : givens) given_names.insert(n);
    for (const auto& [n, a] : unknowns)
      if (given_names.count(n))
        throw ParseError(1, 1, "symbol " + n + " declared both given and unknown");

    Signature gsig, usig;
    try {
      gsig = Signature::make(givens);
      usig = Signature::make(unknowns);
    } catch (const std::invalid_argument& e) {
      throw ParseError(1, 1, e.what());
    }
    SignatureSum sum(gsig, usig);

    std::vector<PartialTerm> rhs(usig.size());
    std::vector<std::vector<std::string>> head_vars(usig.size());
    std::vector<bool> seen(usig.size(), false);
    for (const auto& eq : equations) {
      auto f = usig.find(eq.head);
      if (!f)
        throw ParseError(eq.line, eq.col,
                         "equation head " + eq.head + " is not a declared unknown");
      if (seen[f->index()])
        throw ParseError(eq.line, eq.col, "duplicate equation for " + eq.head);
      seen[f->index()] = true;
      if (eq.vars.size() != f->arity())
        throw ParseError(eq.line, eq.col,
                         "head of " + eq.head + " binds " + std::to_string(eq.vars.size()) +
                             " variables but the arity is " + std::to_string(f->arity()));
      std::unordered_map<std::string, std::uint64_t> binder;
      for (std::size_t i = 0; i < eq.vars.size(); ++i) {
        if (!binder.emplace(eq.vars[i], i).second)
          throw ParseError(eq.line, eq.col, "duplicate variable " + eq.vars[i]);
      }
      head_vars[f->index()] = eq.vars;
      rhs[f->index()] = resolve(eq.rhs, sum, binder);
    }
    for (std::uint32_t k = 0; k < usig.size(); ++k)
      if (!seen[k])
        throw ParseError(1, 1, "unknown " + usig.symbol(k).name() + " lacks an equation");

    SchemeFile file{Rps::from_terms(sum, std::move(rhs)), std::move(head_vars),
                    std::move(algebra)};
    return file;
  }

  PartialTerm resolve(const RawEquation::Node& n, const SignatureSum& sum,
                      const std::unordered_map<std::string, std::uint64_t>& binder) {
    auto bound = binder.find(n.name);
    if (bound != binder.end() && !n.applied) return PartialTerm::var(bound->second);
    auto sym = sum.sum().find(n.name);
    if (!sym) {
      if (bound != binder.end())
        throw ParseError(n.line, n.col, "variable " + n.name + " cannot be applied");
      throw ParseError(n.line, n.col, "unknown symbol " + n.name);
    }
    if (n.args.size() != sym->arity())
      throw ParseError(n.line, n.col, "symbol " + n.name + " has arity " +
                                          std::to_string(sym->arity()) + " but got " +
                                          std::to_string(n.args.size()) + " arguments");
    std::vector<PartialTerm> args;
    args.reserve(n.args.size());
    for (const auto& a : n.args) args.push_back(resolve(a, sum, binder));
    return PartialTerm::node(*sym, std::move(args));
  }

  Lexer lex_;
};

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void print_decls(std::ostringstream& out, const char* kw, const Signature& sig) {
  if (sig.size() == 0) return;
  out << kw << " ";
  for (std::uint32_t i = 0; i < sig.size(); ++i) {
    if (i) out << ", ";
    out << sig.symbol(i).name() << ":" << sig.symbol(i).arity();
  }
  out << ";\n";
}

void print_term(std::ostringstream& out, const PartialTerm& t,
                const std::vector<std::string>& vars) {
  switch (t.tag) {
    case PartialTerm::Tag::Var:
      out << vars.at(t.leaf);
      return;
    case PartialTerm::Tag::Node:
      out << t.sym.name();
      if (!t.children.empty()) {
        out << "(";
        for (std::size_t i = 0; i < t.children.size(); ++i) {
          if (i) out << ", ";
          print_term(out, t.children[i], vars);
        }
        out << ")";
      }
      return;
    default:
      throw std::logic_error("scheme right-hand sides have no such leaves");
  }
}

}  // namespace

SchemeFile parse_scheme(const std::string& text) { return Parser(text).run(); }

std::string print_scheme(const SchemeFile& f) {
  std::ostringstream out;
  print_decls(out, "given", f.scheme.givens());
  print_decls(out, "unknown", f.scheme.unknowns());
  for (std::uint32_t k = 0; k < f.scheme.unknowns().size(); ++k) {
    OpSym u = f.scheme.unknowns().symbol(k);
    out << u.name();
    const auto& vars = f.head_vars.at(k);
    if (!vars.empty()) {
      out << "(";
      for (std::size_t i = 0; i < vars.size(); ++i) out << (i ? ", " : "") << vars[i];
      out << ")";
    } else {
      out << "()";
    }
    out << " = ";
    print_term(out, f.scheme.rhs_terms().at(k), vars);
    out << ";\n";
  }
  if (f.algebra) {
    out << "algebra " << f.algebra->name;
    bool args = !f.algebra->numbers.empty() || !f.algebra->tuples.empty() ||
                !f.algebra->kv.empty();
    if (args) {
      out << "(";
      bool first = true;
      for (double v : f.algebra->numbers) {
        out << (first ? "" : ", ") << fmt12(v);
        first = false;
      }
      for (const auto& tup : f.algebra->tuples) {
        out << (first ? "" : ", ") << "(";
        for (std::size_t i = 0; i < tup.size(); ++i)
          out << (i ? ", " : "") << fmt12(tup[i]);
        out << ")";
        first = false;
      }
      for (const auto& [k, v] : f.algebra->kv) {
        out << (first ? "" : ", ") << k;
        if (!v.empty()) out << "=" << v;
        first = false;
      }
      out << ")";
    }
    out << ";\n";
  }
  return out.str();
}

namespace {

std::size_t term_size(const PartialTerm& t) {
  std::size_t n = 1;
  for (const auto& c : t.children) n += term_size(c);
  return n;
}

PartialTerm subst_vars(const PartialTerm& t, std::span<const PartialTerm> env) {
  switch (t.tag) {
    case PartialTerm::Tag::Var:
      return env[t.leaf];
    case PartialTerm::Tag::Node: {
      std::vector<PartialTerm> args;
      args.reserve(t.children.size());
      for (const auto& c : t.children) args.push_back(subst_vars(c, env));
      return PartialTerm::node(t.sym, std::move(args));
    }
    default:
      return t;
  }
}

// one simultaneous round: every unknown occurrence expands exactly once
PartialTerm rewrite_once(const Rps& r, const PartialTerm& t) {
  if (t.tag != PartialTerm::Tag::Node) return t;
  std::vector<PartialTerm> args;
  args.reserve(t.children.size());
  for (const auto& c : t.children) args.push_back(rewrite_once(r, c));
  if (r.sum().from_right(t.sym)) {
    const PartialTerm& rhs = r.rhs_terms().at(r.sum().project(t.sym).index());
    return subst_vars(rhs, args);
  }
  return PartialTerm::node(t.sym, std::move(args));
}

}  // namespace

PartialTerm expand_scheme(const Rps& r, std::uint32_t unknown, std::uint32_t rounds,
                          std::size_t node_cap) {
  if (r.rhs_terms().empty() && r.unknowns().size() > 0)
    throw std::invalid_argument("expansion needs finite right-hand terms");
  OpSym f = r.sum().inject_right(r.unknowns().symbol(unknown));
  std::vector<PartialTerm> vars;
  for (std::uint32_t i = 0; i < f.arity(); ++i) vars.push_back(PartialTerm::var(i));
  PartialTerm t = PartialTerm::node(f, std::move(vars));
  for (std::uint32_t k = 0; k < rounds; ++k) {
    t = rewrite_once(r, t);
    if (term_size(t) > node_cap)
      throw std::invalid_argument("expansion exceeds the node cap; lower the depth");
  }
  return t;
}

PartialTerm prune_unknowns(const Rps& r, const PartialTerm& t) {
  if (t.tag == PartialTerm::Tag::Node) {
    if (r.sum().from_right(t.sym)) return PartialTerm::bottom();
    std::vector<PartialTerm> args;
    args.reserve(t.children.size());
    for (const auto& c : t.children) args.push_back(prune_unknowns(r, c));
    return PartialTerm::node(t.sym, std::move(args));
  }
  return t;
}

}  // namespace treerec
