#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>
#include <tuple>

#include "dgforge/fluxdsl.hpp"

namespace dgforge::flux {

namespace {

class DagBuilder {
 public:
  explicit DagBuilder(const FluxSpec& spec) : spec_(spec) {
    for (const auto& f : spec.fields) {
      offsets_[f.name] = static_cast<int>(components_.size());
      for (const auto& c : f.components) components_.push_back(c);
    }
  }

  std::vector<int> lower(const Expr& e) {
    switch (e->op) {
      case Op::trace: return field(e->name, [&](int c) { return leaf_trace(c, e->side); });
      case Op::jump:
        return field(e->name, [&](int c) { return sub(leaf_trace(c, Side::interior), leaf_trace(c, Side::exterior)); });
      case Op::average:
        return field(e->name, [&](int c) {
          return mul(constant(0.5), add(leaf_trace(c, Side::interior), leaf_trace(c, Side::exterior)));
        });
      case Op::normal: {
        std::vector<int> r;
        for (int d = 0; d < 3; ++d) r.push_back(intern({ScalarOp::normal, d, Side::interior, 0.0, -1, -1}));
        return r;
      }
      case Op::constant: return {constant(e->value)};
      case Op::param: {
        auto it = spec_.params.find(e->name);
        if (it == spec_.params.end()) throw Error("unbound parameter '" + e->name + "'");
        return {constant(it->second)};
      }
      case Op::vec: return {lower(e->args[0])[0], lower(e->args[1])[0], lower(e->args[2])[0]};
      case Op::add: return zip(lower(e->args[0]), lower(e->args[1]), [&](int a, int b) { return add(a, b); });
      case Op::sub: return zip(lower(e->args[0]), lower(e->args[1]), [&](int a, int b) { return sub(a, b); });
      case Op::neg: {
        auto a = lower(e->args[0]);
        for (auto& x : a) x = neg(x);
        return a;
      }
      case Op::scale: {
        const int s = lower(e->args[0])[0];
        auto a = lower(e->args[1]);
        for (auto& x : a) x = mul(s, x);
        return a;
      }
      case Op::cross: {
        const auto a = lower(e->args[0]), b = lower(e->args[1]);
        return {sub(mul(a[1], b[2]), mul(a[2], b[1])), sub(mul(a[2], b[0]), mul(a[0], b[2])),
                sub(mul(a[0], b[1]), mul(a[1], b[0]))};
      }
      case Op::dot: {
        const auto a = lower(e->args[0]), b = lower(e->args[1]);
        return {add(add(mul(a[0], b[0]), mul(a[1], b[1])), mul(a[2], b[2]))};
      }
      case Op::abs: return {abs(lower(e->args[0])[0])};
    }
    throw Error("unknown flux node");
  }

  LoweredFlux finish(std::vector<int> outputs) {
    LoweredFlux l;
    l.components = components_;
    l.nodes = nodes_;
    l.outputs = std::move(outputs);
    return l;
  }

 private:
  using Key = std::tuple<int, int, int, std::uint64_t, int, int>;

  template <class F>
  std::vector<int> field(const std::string& name, F f) {
    auto it = offsets_.find(name);
    if (it == offsets_.end()) throw Error("unknown field '" + name + "'");
    std::vector<int> r;
    for (const auto& g : spec_.fields) {
      if (g.name != name) continue;
      for (size_t c = 0; c < g.components.size(); ++c) r.push_back(f(it->second + static_cast<int>(c)));
    }
    return r;
  }

  template <class F>
  std::vector<int> zip(const std::vector<int>& a, const std::vector<int>& b, F f) {
    std::vector<int> r;
    for (size_t i = 0; i < a.size(); ++i) r.push_back(f(a[i], b[i]));
    return r;
  }

  int intern(ScalarNode n) {
    if (n.op == ScalarOp::constant && n.value == 0.0) n.value = 0.0;  // merge -0 into +0
    std::uint64_t bits = 0;
    std::memcpy(&bits, &n.value, sizeof bits);
    Key key{static_cast<int>(n.op), n.component, static_cast<int>(n.side), bits, n.a, n.b};
    auto [it, inserted] = index_.try_emplace(key, static_cast<int>(nodes_.size()));
    if (inserted) nodes_.push_back(n);
    return it->second;
  }

  bool is_const(int id, double v) const { return nodes_[id].op == ScalarOp::constant && nodes_[id].value == v; }
  bool is_const(int id) const { return nodes_[id].op == ScalarOp::constant; }
  double value(int id) const { return nodes_[id].value; }

  int leaf_trace(int c, Side side) { return intern({ScalarOp::trace, c, side, 0.0, -1, -1}); }
  int constant(double v) { return intern({ScalarOp::constant, 0, Side::interior, v, -1, -1}); }

  int binary(ScalarOp op, int a, int b) {
    if (b < a && (op == ScalarOp::add || op == ScalarOp::mul)) std::swap(a, b);
    return intern({op, 0, Side::interior, 0.0, a, b});
  }

  int add(int a, int b) {
    if (is_const(a) && is_const(b)) return constant(value(a) + value(b));
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (nodes_[b].op == ScalarOp::neg) return sub(a, nodes_[b].a);
    if (nodes_[a].op == ScalarOp::neg) return sub(b, nodes_[a].a);
    return binary(ScalarOp::add, a, b);
  }

  int sub(int a, int b) {
    if (is_const(a) && is_const(b)) return constant(value(a) - value(b));
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) return neg(b);
    if (nodes_[b].op == ScalarOp::neg) return add(a, nodes_[b].a);
    return binary(ScalarOp::sub, a, b);
  }

  int mul(int a, int b) {
    if (is_const(a) && is_const(b)) return constant(value(a) * value(b));
    if (is_const(b)) std::swap(a, b);
    if (is_const(a)) {
      if (value(a) == 0.0) return constant(0.0);
      if (value(a) == 1.0) return b;
      if (value(a) == -1.0) return neg(b);
      if (nodes_[b].op == ScalarOp::neg) return mul(constant(-value(a)), nodes_[b].a);
      if (nodes_[b].op == ScalarOp::mul && is_const(nodes_[b].a)) {
        return mul(constant(value(a) * value(nodes_[b].a)), nodes_[b].b);
      }
    }
    if (nodes_[a].op == ScalarOp::neg && nodes_[b].op == ScalarOp::neg) return mul(nodes_[a].a, nodes_[b].a);
    return binary(ScalarOp::mul, a, b);
  }

  int neg(int a) {
    if (is_const(a)) return constant(-value(a));
    if (nodes_[a].op == ScalarOp::neg) return nodes_[a].a;
    return intern({ScalarOp::neg, 0, Side::interior, 0.0, a, -1});
  }

  int abs(int a) {
    if (is_const(a)) return constant(std::fabs(value(a)));
    if (nodes_[a].op == ScalarOp::neg) a = nodes_[a].a;
    return intern({ScalarOp::abs, 0, Side::interior, 0.0, a, -1});
  }

  const FluxSpec& spec_;
  std::map<std::string, int> offsets_;
  std::vector<std::string> components_;
  std::vector<ScalarNode> nodes_;
  std::map<Key, int> index_;
};

bool is_leaf(const ScalarNode& n) {
  return n.op == ScalarOp::trace || n.op == ScalarOp::normal || n.op == ScalarOp::constant;
}

// Marks reachable nodes and counts operand uses among reachable nodes and outputs.
void usage(const LoweredFlux& l, std::vector<bool>& reachable, std::vector<int>& uses) {
  reachable.assign(l.nodes.size(), false);
  uses.assign(l.nodes.size(), 0);
  for (int o : l.outputs) {
    reachable[o] = true;
    ++uses[o];
  }
  for (int i = static_cast<int>(l.nodes.size()) - 1; i >= 0; --i) {
    if (!reachable[i]) continue;
    for (int c : {l.nodes[i].a, l.nodes[i].b}) {
      if (c < 0) continue;
      reachable[c] = true;
      ++uses[c];
    }
  }
}

std::string default_literal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

LoweredFlux lower(const FluxSpec& spec) {
  typecheck(spec);
  DagBuilder dag(spec);
  std::vector<int> outputs;
  for (const auto& [name, expr] : spec.outputs) {
    for (int id : dag.lower(expr)) outputs.push_back(id);
  }
  LoweredFlux l = dag.finish(std::move(outputs));

  std::vector<bool> reachable;
  std::vector<int> uses;
  usage(l, reachable, uses);
  for (int i = 0; i < static_cast<int>(l.nodes.size()); ++i) {
    if (reachable[i] && !is_leaf(l.nodes[i]) && uses[i] > 1) l.temporaries.push_back(i);
  }
  return l;
}

int LoweredFlux::flop_count() const {
  std::vector<bool> reachable;
  std::vector<int> uses;
  usage(*this, reachable, uses);
  int flops = 0;
  for (size_t i = 0; i < nodes.size(); ++i) flops += reachable[i] && !is_leaf(nodes[i]);
  return flops;
}

std::vector<double> evaluate(const LoweredFlux& l, const std::vector<double>& minus, const std::vector<double>& plus,
                             const std::array<double, 3>& normal) {
  std::vector<double> v(l.nodes.size(), 0.0);
  for (size_t i = 0; i < l.nodes.size(); ++i) {
    const auto& n = l.nodes[i];
    switch (n.op) {
      case ScalarOp::trace: v[i] = n.side == Side::interior ? minus.at(n.component) : plus.at(n.component); break;
      case ScalarOp::normal: v[i] = normal[n.component]; break;
      case ScalarOp::constant: v[i] = n.value; break;
      case ScalarOp::add: v[i] = v[n.a] + v[n.b]; break;
      case ScalarOp::sub: v[i] = v[n.a] - v[n.b]; break;
      case ScalarOp::mul: v[i] = v[n.a] * v[n.b]; break;
      case ScalarOp::neg: v[i] = -v[n.a]; break;
      case ScalarOp::abs: v[i] = std::fabs(v[n.a]); break;
    }
  }
  std::vector<double> out;
  for (int o : l.outputs) out.push_back(v[o]);
  return out;
}

std::vector<std::string> emit_statements(const LoweredFlux& l, const EmitStyle& style) {
  auto literal = style.literal ? style.literal : default_literal;
  std::map<int, std::string> temp_name;
  for (size_t i = 0; i < l.temporaries.size(); ++i) {
    temp_name[l.temporaries[i]] = style.temp_prefix + std::to_string(i);
  }

  std::function<std::string(int, bool)> expr = [&](int id, bool defining) -> std::string {
    if (!defining) {
      if (auto it = temp_name.find(id); it != temp_name.end()) return it->second;
    }
    const auto& n = l.nodes[id];
    switch (n.op) {
      case ScalarOp::trace: return style.trace(n.component, n.side);
      case ScalarOp::normal: return style.normal(n.component);
      case ScalarOp::constant: {
        std::string s = literal(n.value);
        return s[0] == '-' ? "(" + s + ")" : s;
      }
      case ScalarOp::add: return "(" + expr(n.a, false) + " + " + expr(n.b, false) + ")";
      case ScalarOp::sub: return "(" + expr(n.a, false) + " - " + expr(n.b, false) + ")";
      case ScalarOp::mul: return "(" + expr(n.a, false) + " * " + expr(n.b, false) + ")";
      case ScalarOp::neg: return "(-" + expr(n.a, false) + ")";
      case ScalarOp::abs: return "abs(" + expr(n.a, false) + ")";
    }
    return "";
  };

  std::vector<std::string> lines;
  for (int t : l.temporaries) lines.push_back(style.type + " " + temp_name[t] + " = " + expr(t, true) + ";");
  for (size_t c = 0; c < l.outputs.size(); ++c) {
    lines.push_back(style.output(static_cast<int>(c)) + " = " + expr(l.outputs[c], false) + ";");
  }
  return lines;
}

std::string dump(const LoweredFlux& l) {
  EmitStyle style;
  style.trace = [&](int c, Side s) { return l.components[c] + (s == Side::interior ? "_m" : "_p"); };
  style.normal = [](int axis) { return std::string("n") + "xyz"[axis]; };
  style.output = [&](int c) { return "flux_" + l.components[c]; };
  std::ostringstream out;
  out << "# " << l.temporaries.size() << " temporaries, " << l.outputs.size() << " outputs, " << l.flop_count()
      << " flops\n";
  for (const auto& line : emit_statements(l, style)) out << line << "\n";
  return out.str();
}

}  // namespace dgforge::flux
