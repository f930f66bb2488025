#include <charconv>
#include <cstdlib>

#include "dgforge/dialect.hpp"

namespace dgforge::dgk {

namespace {

bool is_type_word(const std::string& s) { return s == "int" || s == "float" || s == "double"; }

Type to_type(const std::string& s) {
  if (s == "int") return Type::i64;
  if (s == "float") return Type::f32;
  return Type::f64;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  Kernel kernel() {
    Kernel k;
    expect_word("kernel");
    k.name = ident();
    expect_word("lanes");
    expect("(");
    const auto lanes = int_literal();
    if (lanes < 1) fail("lanes must be positive");
    k.lanes = static_cast<int>(lanes);
    expect(")");
    expect("(");
    if (!accept(")")) {
      do k.params.push_back(param());
      while (accept(","));
      expect(")");
    }
    expect("{");
    while (!accept("}")) k.body.push_back(statement());
    if (peek().kind != Tok::end) fail("unexpected text after kernel body");
    return k;
  }

 private:
  const Token& peek(int ahead = 0) const { return t_[std::min(pos_ + ahead, t_.size() - 1)]; }
  const Token& next() {
    const Token& tok = peek();
    if (pos_ < t_.size() - 1) ++pos_;
    return tok;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, peek().line); }

  bool is(const std::string& s, int ahead = 0) const {
    const Token& tok = peek(ahead);
    return (tok.kind == Tok::punct || tok.kind == Tok::ident) && tok.text == s;
  }
  bool accept(const std::string& s) {
    if (!is(s)) return false;
    next();
    return true;
  }
  void expect(const std::string& s) {
    if (!accept(s)) fail("expected '" + s + "' but found '" + peek().text + "'");
  }
  void expect_word(const std::string& s) { expect(s); }

  std::string ident() {
    if (peek().kind != Tok::ident) fail("expected identifier but found '" + peek().text + "'");
    return next().text;
  }

  Type type() {
    if (peek().kind != Tok::ident || !is_type_word(peek().text)) fail("expected a type but found '" + peek().text + "'");
    return to_type(next().text);
  }

  std::int64_t int_literal() {
    bool neg = accept("-");
    if (peek().kind != Tok::int_lit) fail("expected integer literal");
    std::int64_t v = 0;
    const auto& text = next().text;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) fail("integer literal out of range");
    return neg ? -v : v;
  }

  // Real literal text (optionally signed) parsed at the given precision.
  double real_value(const std::string& text, bool single) {
    std::string body = text;
    if (!body.empty() && body.back() == 'f') body.pop_back();
    if (single) return static_cast<double>(std::strtof(body.c_str(), nullptr));
    return std::strtod(body.c_str(), nullptr);
  }

  Param param() {
    Param p;
    if (accept("global")) {
      p.global = true;
      p.is_const = accept("const");
      p.type = type();
      expect("*");
    } else {
      p.type = type();
    }
    p.name = ident();
    return p;
  }

  std::unique_ptr<Stmt> make(StmtKind kind) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->line = peek().line;
    return s;
  }

  std::vector<std::unique_ptr<Stmt>> block_or_statement() {
    std::vector<std::unique_ptr<Stmt>> out;
    if (accept("{")) {
      while (!accept("}")) {
        if (peek().kind == Tok::end) fail("unterminated block");
        out.push_back(statement());
      }
    } else {
      out.push_back(statement());
    }
    return out;
  }

  std::unique_ptr<Stmt> statement() {
    if (is("{")) {
      auto s = make(StmtKind::block);
      s->body = block_or_statement();
      return s;
    }
    if (is("barrier")) {
      auto s = make(StmtKind::barrier);
      next();
      expect("(");
      expect(")");
      expect(";");
      return s;
    }
    if (is("shared")) {
      auto s = make(StmtKind::decl_shared);
      next();
      s->type = type();
      s->name = ident();
      expect("[");
      s->size = int_literal();
      if (s->size < 1) fail("array size must be positive");
      expect("]");
      expect(";");
      return s;
    }
    if (is("const")) {
      auto s = make(StmtKind::decl_const);
      next();
      s->type = type();
      s->name = ident();
      expect("[");
      s->size = int_literal();
      if (s->size < 1) fail("array size must be positive");
      expect("]");
      expect("=");
      expect("{");
      do {
        if (s->type == Type::i64) {
          s->int_table.push_back(int_literal());
        } else {
          const bool neg = accept("-");
          const Token& tok = next();
          if (tok.kind != Tok::real_lit && tok.kind != Tok::int_lit) fail("expected numeric literal in table");
          double v = real_value(tok.text, s->type == Type::f32);
          s->table.push_back(neg ? -v : v);
        }
      } while (accept(","));
      expect("}");
      expect(";");
      const size_t count = s->type == Type::i64 ? s->int_table.size() : s->table.size();
      if (static_cast<std::int64_t>(count) != s->size) fail("table initializer length does not match its size");
      return s;
    }
    if (is("uniform") || (peek().kind == Tok::ident && is_type_word(peek().text))) {
      auto s = make(StmtKind::decl_var);
      s->uniform = accept("uniform");
      s->type = type();
      s->name = ident();
      if (accept("=")) s->value = expression();
      if (s->uniform && !s->value) fail("uniform declaration needs an initializer");
      expect(";");
      return s;
    }
    if (is("for")) return for_loop();
    if (is("if")) {
      auto s = make(StmtKind::if_else);
      next();
      expect("(");
      s->value = expression();
      expect(")");
      s->body = block_or_statement();
      if (accept("else")) {
        s->has_else = true;
        s->else_body = block_or_statement();
      }
      return s;
    }
    if (peek().kind == Tok::ident) {
      auto s = make(StmtKind::assign);
      s->name = ident();
      if (accept("[")) {
        s->index = expression();
        expect("]");
      }
      for (const char* op : {"=", "+=", "-=", "*="}) {
        if (accept(op)) {
          s->op = op;
          break;
        }
      }
      if (s->op.empty()) fail("expected assignment operator but found '" + peek().text + "'");
      s->value = expression();
      expect(";");
      return s;
    }
    fail("unexpected '" + peek().text + "'");
  }

  std::unique_ptr<Stmt> for_loop() {
    auto s = make(StmtKind::for_loop);
    next();
    expect("(");
    expect("int");
    s->type = Type::i64;
    s->name = ident();
    expect("=");
    s->value = expression();
    expect(";");
    if (ident() != s->name) fail("loop condition must test the loop variable");
    expect("<");
    s->bound = expression();
    expect(";");
    if (ident() != s->name) fail("loop increment must update the loop variable");
    expect("+=");
    s->step = expression();
    expect(")");
    s->body = block_or_statement();
    return s;
  }

  std::unique_ptr<Expr> make_expr(ExprKind kind, int line) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->line = line;
    return e;
  }

  std::unique_ptr<Expr> expression() { return ternary(); }

  std::unique_ptr<Expr> ternary() {
    auto cond = binary(0);
    if (!is("?")) return cond;
    const int line = peek().line;
    next();
    auto a = expression();
    expect(":");
    auto b = expression();
    auto e = make_expr(ExprKind::ternary, line);
    e->args.push_back(std::move(cond));
    e->args.push_back(std::move(a));
    e->args.push_back(std::move(b));
    return e;
  }

  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return -1;
  }

  std::unique_ptr<Expr> binary(int min_prec) {
    auto lhs = unary();
    while (peek().kind == Tok::punct) {
      const std::string op = peek().text;
      const int prec = precedence(op);
      if (prec < 0 || prec < min_prec) break;
      const int line = peek().line;
      next();
      auto rhs = binary(prec + 1);
      auto e = make_expr(ExprKind::binary, line);
      e->op = op;
      e->args.push_back(std::move(lhs));
      e->args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  std::unique_ptr<Expr> unary() {
    const int line = peek().line;
    if (is("-")) {
      next();
      auto a = unary();
      // A minus applied directly to a literal is part of the literal.
      if (a->kind == ExprKind::int_lit) {
        a->ival = -a->ival;
        return a;
      }
      if (a->kind == ExprKind::real_lit) {
        a->rval = -a->rval;
        return a;
      }
      auto e = make_expr(ExprKind::unary, line);
      e->op = "-";
      e->args.push_back(std::move(a));
      return e;
    }
    if (is("!")) {
      next();
      auto e = make_expr(ExprKind::unary, line);
      e->op = "!";
      e->args.push_back(unary());
      return e;
    }
    if (is("(") && peek(1).kind == Tok::ident && is_type_word(peek(1).text) && is(")", 2)) {
      next();
      auto e = make_expr(ExprKind::cast, line);
      e->type = type();
      expect(")");
      e->args.push_back(unary());
      return e;
    }
    return postfix();
  }

  std::unique_ptr<Expr> postfix() {
    const Token tok = next();
    if (tok.kind == Tok::int_lit) {
      auto e = make_expr(ExprKind::int_lit, tok.line);
      auto [p, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), e->ival);
      if (ec != std::errc()) throw ParseError("integer literal out of range", tok.line);
      return e;
    }
    if (tok.kind == Tok::real_lit) {
      auto e = make_expr(ExprKind::real_lit, tok.line);
      const bool single = tok.text.back() == 'f';
      e->type = single ? Type::f32 : Type::f64;
      e->rval = real_value(tok.text, single);
      return e;
    }
    if (tok.kind == Tok::punct && tok.text == "(") {
      auto e = expression();
      expect(")");
      return e;
    }
    if (tok.kind != Tok::ident) throw ParseError("unexpected '" + tok.text + "' in expression", tok.line);
    if (accept("(")) {
      auto e = make_expr(ExprKind::call, tok.line);
      e->op = tok.text;
      if (!accept(")")) {
        do e->args.push_back(expression());
        while (accept(","));
        expect(")");
      }
      return e;
    }
    if (accept("[")) {
      auto e = make_expr(ExprKind::index, tok.line);
      e->name = tok.text;
      e->args.push_back(expression());
      expect("]");
      return e;
    }
    auto e = make_expr(ExprKind::var, tok.line);
    e->name = tok.text;
    return e;
  }

  std::vector<Token> t_;
  size_t pos_ = 0;
};

}  // namespace

Kernel parse(const std::string& source) {
  Parser p(tokenize(source));
  return p.kernel();
}

Kernel compile_dialect(const std::string& source) {
  Kernel k = parse(source);
  check(k);
  return k;
}

}  // namespace dgforge::dgk
