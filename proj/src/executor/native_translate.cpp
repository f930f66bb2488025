#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "dgforge/executor.hpp"

namespace dgforge {

namespace {

using dgk::Expr;
using dgk::ExprKind;
using dgk::Stmt;
using dgk::StmtKind;
using dgk::SymbolKind;
using dgk::Type;

const char* ctype(Type t) {
  switch (t) {
    case Type::i64: return "long long";
    case Type::f32: return "float";
    case Type::f64: return "double";
  }
  return "?";
}

std::string real_literal(double v, Type t) {
  char buf[64];
  if (t == Type::f32) std::snprintf(buf, sizeof buf, "%.9g", v);
  else std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  if (t == Type::f32) s += "f";
  return s[0] == '-' ? "(" + s + ")" : s;
}

std::string int_literal(long long v) {
  // The most negative value has no positive literal form.
  if (v == (-9223372036854775807LL - 1)) return "(-9223372036854775807LL - 1)";
  std::string s = std::to_string(v) + "LL";
  return v < 0 ? "(" + s + ")" : s;
}

class Translator {
 public:
  explicit Translator(const dgk::Kernel& k) : k_(k) {}

  std::string run() {
    std::ostringstream out;
    out << "// generated from dialect kernel " << k_.name << "\n\n";
    for (const auto& s : k_.body) {
      if (s->kind != StmtKind::decl_const) continue;
      out << "static const " << ctype(s->type) << " " << name(s->symbol) << "[" << s->size << "] = {";
      for (std::int64_t i = 0; i < s->size; ++i) {
        if (i % 8 == 0) out << "\n    ";
        out << (s->type == Type::i64 ? int_literal(s->int_table[i]) : real_literal(s->table[i], s->type));
        if (i + 1 < s->size) out << ", ";
      }
      out << "};\n";
    }
    out << "\nextern \"C\" void " << k_.name
        << "_entry(void** dgk_bufs, const long long* dgk_ints, const double* dgk_reals, long long dgk_groups) {\n";
    out << "  (void)dgk_bufs; (void)dgk_ints; (void)dgk_reals;\n";
    for (size_t s = 0; s < k_.symbols.size(); ++s) {
      const auto& sym = k_.symbols[s];
      if (sym.kind == SymbolKind::buffer) {
        out << "  " << (sym.writable ? "" : "const ") << ctype(sym.type) << "* __restrict " << name(s) << " = ("
            << (sym.writable ? "" : "const ") << ctype(sym.type) << "*)dgk_bufs[" << sym.param_index << "];\n";
      } else if (sym.kind == SymbolKind::scalar_param) {
        out << "  const " << ctype(sym.type) << " " << name(s) << " = ("
            << ctype(sym.type) << ")" << (sym.type == Type::i64 ? "dgk_ints[" : "dgk_reals[") << sym.param_index
            << "];\n";
      }
    }
    out << "#pragma omp parallel for schedule(static)\n";
    out << "  for (long long dgk_g = 0; dgk_g < dgk_groups; ++dgk_g) {\n";
    for (const auto& s : k_.body) {
      if (s->kind == StmtKind::decl_shared) {
        out << "    " << ctype(s->type) << " " << name(s->symbol) << "[" << s->size << "];\n";
      }
    }
    group_block(k_.body, out, 2);
    out << "  }\n}\n";
    return out.str();
  }

 private:
  std::string name(size_t symbol) const {
    const auto& sym = k_.symbols[symbol];
    const char* prefix = sym.kind == SymbolKind::buffer || sym.kind == SymbolKind::scalar_param ? "p"
                         : sym.kind == SymbolKind::shared                                     ? "s"
                         : sym.kind == SymbolKind::const_table                                ? "c"
                                                                                              : "v";
    return std::string(prefix) + std::to_string(symbol) + "_" + sym.name;
  }

  std::string ref(int symbol) const {
    std::string n = name(symbol);
    return promoted_.count(symbol) ? n + "[dgk_lane]" : n;
  }

  static void pad(std::ostringstream& out, int depth) { out << std::string(2 * depth, ' '); }

  static void collect_expr(const Expr& e, std::set<int>& refs) {
    if (e.symbol >= 0) refs.insert(e.symbol);
    for (const auto& a : e.args) collect_expr(*a, refs);
  }

  static void collect(const Stmt& s, std::set<int>& refs) {
    if (s.symbol >= 0 && s.kind == StmtKind::assign) refs.insert(s.symbol);
    for (const auto* e : {s.index.get(), s.value.get(), s.bound.get(), s.step.get()}) {
      if (e) collect_expr(*e, refs);
    }
    for (const auto& c : s.body) collect(*c, refs);
    for (const auto& c : s.else_body) collect(*c, refs);
  }

  // Statements that must run at group level: barriers, barrier-containing
  // loops/blocks, and uniform declarations directly in a group-level list.
  static bool group_level(const Stmt& s) {
    return s.kind == StmtKind::barrier || s.has_barrier || s.kind == StmtKind::decl_shared ||
           s.kind == StmtKind::decl_const || (s.kind == StmtKind::decl_var && s.uniform);
  }

  void group_block(const std::vector<std::unique_ptr<Stmt>>& list, std::ostringstream& out, int depth) {
    // Split into items: each item is either one group-level statement or a run of lane statements.
    struct Item {
      const Stmt* group = nullptr;
      std::vector<const Stmt*> lane;
    };
    std::vector<Item> items;
    for (const auto& s : list) {
      if (group_level(*s)) {
        items.push_back({s.get(), {}});
      } else {
        if (items.empty() || items.back().group) items.push_back({});
        items.back().lane.push_back(s.get());
      }
    }
    // Privates declared in one lane run but referenced elsewhere become per-lane arrays.
    std::vector<std::set<int>> refs(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
      if (items[i].group) collect(*items[i].group, refs[i]);
      for (const auto* s : items[i].lane) collect(*s, refs[i]);
    }
    for (size_t i = 0; i < items.size(); ++i) {
      for (const auto* s : items[i].lane) {
        if (s->kind != StmtKind::decl_var) continue;
        for (size_t j = 0; j < items.size(); ++j) {
          if (j != i && refs[j].count(s->symbol)) {
            promoted_.insert(s->symbol);
            pad(out, depth);
            out << ctype(s->type) << " " << name(s->symbol) << "[" << k_.lanes << "];\n";
            break;
          }
        }
      }
    }
    for (const auto& item : items) {
      if (item.group) {
        group_stmt(*item.group, out, depth);
        continue;
      }
      pad(out, depth);
      out << "for (long long dgk_lane = 0; dgk_lane < " << k_.lanes << "; ++dgk_lane) {\n";
      for (const auto* s : item.lane) lane_stmt(*s, out, depth + 1);
      pad(out, depth);
      out << "}\n";
    }
  }

  void group_stmt(const Stmt& s, std::ostringstream& out, int depth) {
    switch (s.kind) {
      case StmtKind::barrier:
      case StmtKind::decl_shared:
      case StmtKind::decl_const: return;
      case StmtKind::decl_var:
        pad(out, depth);
        out << "const " << ctype(s.type) << " " << name(s.symbol) << " = " << convert(*s.value, s.type) << ";\n";
        return;
      case StmtKind::block:
        pad(out, depth);
        out << "{\n";
        group_block(s.body, out, depth + 1);
        pad(out, depth);
        out << "}\n";
        return;
      case StmtKind::for_loop:
        pad(out, depth);
        out << "for (long long " << name(s.symbol) << " = " << expr(*s.value) << "; " << name(s.symbol) << " < "
            << expr(*s.bound) << "; " << name(s.symbol) << " += " << expr(*s.step) << ") {\n";
        group_block(s.body, out, depth + 1);
        pad(out, depth);
        out << "}\n";
        return;
      default: throw Error("internal: unexpected group-level statement");
    }
  }

  void lane_stmt(const Stmt& s, std::ostringstream& out, int depth) {
    switch (s.kind) {
      case StmtKind::block:
        pad(out, depth);
        out << "{\n";
        for (const auto& c : s.body) lane_stmt(*c, out, depth + 1);
        pad(out, depth);
        out << "}\n";
        return;
      case StmtKind::decl_var: {
        const std::string init = s.value ? convert(*s.value, s.type) : std::string("0");
        pad(out, depth);
        if (promoted_.count(s.symbol)) {
          out << ref(s.symbol) << " = " << init << ";\n";
        } else {
          out << ctype(s.type) << " " << name(s.symbol) << " = " << init << ";\n";
        }
        return;
      }
      case StmtKind::assign: {
        const auto& sym = k_.symbols[s.symbol];
        std::string target = s.index ? name(s.symbol) + "[" + expr(*s.index) + "]" : ref(s.symbol);
        pad(out, depth);
        out << target << " " << s.op << " " << convert(*s.value, sym.type) << ";\n";
        return;
      }
      case StmtKind::for_loop:
        pad(out, depth);
        out << "for (long long " << name(s.symbol) << " = " << expr(*s.value) << "; " << name(s.symbol) << " < "
            << expr(*s.bound) << "; " << name(s.symbol) << " += " << expr(*s.step) << ") {\n";
        for (const auto& c : s.body) lane_stmt(*c, out, depth + 1);
        pad(out, depth);
        out << "}\n";
        return;
      case StmtKind::if_else:
        pad(out, depth);
        out << "if (" << expr(*s.value) << ") {\n";
        for (const auto& c : s.body) lane_stmt(*c, out, depth + 1);
        pad(out, depth);
        out << "}";
        if (s.has_else) {
          out << " else {\n";
          for (const auto& c : s.else_body) lane_stmt(*c, out, depth + 1);
          pad(out, depth);
          out << "}";
        }
        out << "\n";
        return;
      default: throw Error("internal: unexpected lane-level statement");
    }
  }

  std::string convert(const Expr& e, Type to) {
    if (e.type == to) return expr(e);
    return "((" + std::string(ctype(to)) + ")" + expr(e) + ")";
  }

  std::string expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::int_lit: return int_literal(e.ival);
      case ExprKind::real_lit: return real_literal(e.rval, e.type);
      case ExprKind::var: return ref(e.symbol);
      case ExprKind::index: return name(e.symbol) + "[" + expr(*e.args[0]) + "]";
      case ExprKind::unary:
        if (e.op == "!") return "((long long)!" + expr(*e.args[0]) + ")";
        return "(-" + expr(*e.args[0]) + ")";
      case ExprKind::binary: {
        if (e.op == "&&" || e.op == "||") {
          return "((long long)(" + expr(*e.args[0]) + " " + e.op + " " + expr(*e.args[1]) + "))";
        }
        const Type ta = e.args[0]->type, tb = e.args[1]->type;
        const Type common = ta == tb ? ta : (ta == Type::i64 ? tb : ta);
        const std::string a = convert(*e.args[0], common), b = convert(*e.args[1], common);
        const bool compare = e.op == "<" || e.op == "<=" || e.op == ">" || e.op == ">=" || e.op == "==" || e.op == "!=";
        if (compare) return "((long long)(" + a + " " + e.op + " " + b + "))";
        return "(" + a + " " + e.op + " " + b + ")";
      }
      case ExprKind::ternary:
        return "(" + expr(*e.args[0]) + " ? " + convert(*e.args[1], e.type) + " : " + convert(*e.args[2], e.type) + ")";
      case ExprKind::call:
        if (e.op == "lane_id") return "dgk_lane";
        if (e.op == "group_id") return "dgk_g";
        if (e.op == "num_groups") return "dgk_groups";
        if (e.op == "num_lanes") return int_literal(k_.lanes);
        if (e.type == Type::i64) return "__builtin_llabs(" + expr(*e.args[0]) + ")";
        if (e.type == Type::f32) return "__builtin_fabsf(" + expr(*e.args[0]) + ")";
        return "__builtin_fabs(" + expr(*e.args[0]) + ")";
      case ExprKind::cast: return convert(*e.args[0], e.type);
    }
    return "";
  }

  const dgk::Kernel& k_;
  std::set<int> promoted_;
};

}  // namespace

std::string translate_to_cpp(const dgk::Kernel& kernel) { return Translator(kernel).run(); }

}  // namespace dgforge
