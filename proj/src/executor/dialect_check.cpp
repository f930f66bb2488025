#include <map>

#include "dgforge/dialect.hpp"

namespace dgforge::dgk {

namespace {

class Checker {
 public:
  explicit Checker(Kernel& k) : k_(k) {}

  void run() {
    k_.symbols.clear();
    scopes_.emplace_back();
    for (size_t i = 0; i < k_.params.size(); ++i) {
      const Param& p = k_.params[i];
      Symbol s{p.name, p.global ? SymbolKind::buffer : SymbolKind::scalar_param, p.type, !p.global, 0,
               static_cast<int>(i), p.global && !p.is_const};
      declare(s, 0);
    }
    scopes_.emplace_back();
    for (auto& s : k_.body) stmt(*s, true, true);
  }

 private:
  [[noreturn]] static void fail(const std::string& what, int line) { throw ParseError(what, line); }

  int declare(Symbol s, int line) {
    auto& scope = scopes_.back();
    if (scope.count(s.name)) fail("redeclaration of '" + s.name + "'", line);
    const int id = static_cast<int>(k_.symbols.size());
    k_.symbols.push_back(std::move(s));
    scope[k_.symbols.back().name] = id;
    return id;
  }

  int lookup(const std::string& name, int line) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto f = it->find(name); f != it->end()) return f->second;
    }
    fail("undeclared identifier '" + name + "'", line);
  }

  static bool is_array(const Symbol& s) {
    return s.kind == SymbolKind::buffer || s.kind == SymbolKind::shared || s.kind == SymbolKind::const_table;
  }

  // Result type of mixing a and b in arithmetic; reals must agree exactly.
  static Type unify(Type a, Type b, int line) {
    if (a == b) return a;
    if (a == Type::i64) return b;
    if (b == Type::i64) return a;
    fail(std::string("mixed real types ") + type_name(a) + " and " + type_name(b) + " need an explicit cast", line);
  }

  void assignable(Type target, Type value, int line) {
    if (target == value) return;
    if (value == Type::i64 && is_real(target)) return;
    fail(std::string("cannot assign ") + type_name(value) + " to " + type_name(target), line);
  }

  void expr(Expr& e) {
    for (auto& a : e.args) expr(*a);
    switch (e.kind) {
      case ExprKind::int_lit:
        e.type = Type::i64;
        e.uniform = true;
        return;
      case ExprKind::real_lit:
        e.uniform = true;
        return;
      case ExprKind::var: {
        e.symbol = lookup(e.name, e.line);
        const Symbol& s = k_.symbols[e.symbol];
        if (is_array(s)) fail("array '" + e.name + "' used without an index", e.line);
        e.type = s.type;
        e.uniform = s.uniform;
        return;
      }
      case ExprKind::index: {
        e.symbol = lookup(e.name, e.line);
        const Symbol& s = k_.symbols[e.symbol];
        if (!is_array(s)) fail("'" + e.name + "' is not an array", e.line);
        if (e.args[0]->type != Type::i64) fail("array index must be int", e.line);
        e.type = s.type;
        e.uniform = s.kind == SymbolKind::const_table && e.args[0]->uniform;
        return;
      }
      case ExprKind::unary:
        if (e.op == "!") {
          if (e.args[0]->type != Type::i64) fail("'!' requires an int operand", e.line);
          e.type = Type::i64;
        } else {
          e.type = e.args[0]->type;
        }
        e.uniform = e.args[0]->uniform;
        return;
      case ExprKind::binary: {
        const Type a = e.args[0]->type, b = e.args[1]->type;
        e.uniform = e.args[0]->uniform && e.args[1]->uniform;
        if (e.op == "&&" || e.op == "||" || e.op == "%") {
          if (a != Type::i64 || b != Type::i64) fail("'" + e.op + "' requires int operands", e.line);
          e.type = Type::i64;
        } else if (e.op == "<" || e.op == "<=" || e.op == ">" || e.op == ">=" || e.op == "==" || e.op == "!=") {
          unify(a, b, e.line);
          e.type = Type::i64;
        } else {
          e.type = unify(a, b, e.line);
        }
        return;
      }
      case ExprKind::ternary:
        if (e.args[0]->type != Type::i64) fail("condition must be int", e.line);
        e.type = unify(e.args[1]->type, e.args[2]->type, e.line);
        e.uniform = e.args[0]->uniform && e.args[1]->uniform && e.args[2]->uniform;
        return;
      case ExprKind::call:
        if (e.op == "lane_id" || e.op == "group_id" || e.op == "num_groups" || e.op == "num_lanes") {
          if (!e.args.empty()) fail(e.op + "() takes no arguments", e.line);
          e.type = Type::i64;
          e.uniform = e.op != "lane_id";
          return;
        }
        if (e.op == "abs") {
          if (e.args.size() != 1) fail("abs() takes one argument", e.line);
          e.type = e.args[0]->type;
          e.uniform = e.args[0]->uniform;
          return;
        }
        fail("unknown function '" + e.op + "'", e.line);
      case ExprKind::cast:
        e.uniform = e.args[0]->uniform;
        return;
    }
  }

  // group_level: statement runs with all lanes in lockstep phases (barriers allowed).
  void stmt(Stmt& s, bool group_level, bool top) {
    switch (s.kind) {
      case StmtKind::block:
        scopes_.emplace_back();
        for (auto& c : s.body) {
          stmt(*c, group_level, false);
          s.has_barrier |= c->has_barrier;
        }
        scopes_.pop_back();
        return;
      case StmtKind::barrier:
        if (!group_level) fail("barrier() is only allowed at kernel level or inside uniform loops", s.line);
        s.has_barrier = true;
        return;
      case StmtKind::decl_shared:
      case StmtKind::decl_const: {
        if (!top) fail("array declarations are only allowed at kernel level", s.line);
        const bool shared = s.kind == StmtKind::decl_shared;
        s.symbol = declare({s.name, shared ? SymbolKind::shared : SymbolKind::const_table, s.type, false, s.size, -1,
                            shared},
                           s.line);
        return;
      }
      case StmtKind::decl_var:
        if (s.value) {
          expr(*s.value);
          if (s.uniform && !s.value->uniform) fail("initializer of uniform '" + s.name + "' is not uniform", s.line);
          assignable(s.type, s.value->type, s.line);
        }
        s.symbol = declare({s.name, SymbolKind::local, s.type, s.uniform, 0, -1, !s.uniform}, s.line);
        return;
      case StmtKind::assign: {
        s.symbol = lookup(s.name, s.line);
        const Symbol& sym = k_.symbols[s.symbol];
        if (!sym.writable) fail("'" + s.name + "' is not writable", s.line);
        if (is_array(sym) != static_cast<bool>(s.index)) {
          fail(is_array(sym) ? "array '" + s.name + "' needs an index" : "'" + s.name + "' is not an array", s.line);
        }
        if (s.index) {
          expr(*s.index);
          if (s.index->type != Type::i64) fail("array index must be int", s.line);
        }
        expr(*s.value);
        assignable(sym.type, s.value->type, s.line);
        return;
      }
      case StmtKind::for_loop: {
        expr(*s.value);
        expr(*s.bound);
        expr(*s.step);
        if (s.value->type != Type::i64 || s.bound->type != Type::i64 || s.step->type != Type::i64) {
          fail("loop bounds must be int", s.line);
        }
        s.uniform = s.value->uniform && s.bound->uniform && s.step->uniform;
        scopes_.emplace_back();
        s.symbol = declare({s.name, SymbolKind::local, Type::i64, s.uniform, 0, -1, false}, s.line);
        scopes_.emplace_back();
        for (auto& c : s.body) {
          stmt(*c, group_level && s.uniform, false);
          s.has_barrier |= c->has_barrier;
        }
        scopes_.pop_back();
        scopes_.pop_back();
        return;
      }
      case StmtKind::if_else:
        expr(*s.value);
        if (s.value->type != Type::i64) fail("if condition must be int", s.line);
        for (auto* list : {&s.body, &s.else_body}) {
          scopes_.emplace_back();
          for (auto& c : *list) stmt(*c, false, false);
          scopes_.pop_back();
        }
        return;
    }
  }

  Kernel& k_;
  std::vector<std::map<std::string, int>> scopes_;
};

}  // namespace

void check(Kernel& kernel) { Checker(kernel).run(); }

}  // namespace dgforge::dgk
