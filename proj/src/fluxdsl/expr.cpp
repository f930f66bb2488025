#include "dgforge/fluxdsl.hpp"

namespace dgforge::flux {

namespace {

Expr make(Op op, std::vector<Expr> args = {}) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

Expr make_named(Op op, const std::string& name, Side side = Side::interior) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->name = name;
  n->side = side;
  return n;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::trace: return "trace";
    case Op::normal: return "normal";
    case Op::constant: return "const";
    case Op::param: return "param";
    case Op::vec: return "vec";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::neg: return "neg";
    case Op::scale: return "scale";
    case Op::cross: return "cross";
    case Op::dot: return "dot";
    case Op::abs: return "abs";
    case Op::jump: return "jump";
    case Op::average: return "average";
  }
  return "?";
}

const FieldGroup* find_field(const std::vector<FieldGroup>& fields, const std::string& name) {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

Shape check(const Expr& e, const std::vector<FieldGroup>& fields, const std::string& path) {
  if (!e) throw TypeError("null expression", path);
  auto arg = [&](size_t i) {
    return check(e->args.at(i), fields, path + "." + op_name(e->op) + "[" + std::to_string(i) + "]");
  };
  switch (e->op) {
    case Op::trace:
    case Op::jump:
    case Op::average: {
      const FieldGroup* f = find_field(fields, e->name);
      if (!f) throw TypeError("unknown field '" + e->name + "'", path);
      return f->shape();
    }
    case Op::normal: return Shape::vector3;
    case Op::constant:
    case Op::param: return Shape::scalar;
    case Op::vec:
      for (size_t i = 0; i < 3; ++i) {
        if (arg(i) != Shape::scalar) throw TypeError("vec requires scalar components", path);
      }
      return Shape::vector3;
    case Op::add:
    case Op::sub: {
      const Shape a = arg(0), b = arg(1);
      if (a != b) throw TypeError(std::string(op_name(e->op)) + " requires operands of equal shape", path);
      return a;
    }
    case Op::neg: return arg(0);
    case Op::scale: {
      if (arg(0) != Shape::scalar) throw TypeError("scale factor must be scalar", path);
      return arg(1);
    }
    case Op::cross:
      if (arg(0) != Shape::vector3 || arg(1) != Shape::vector3) {
        throw TypeError("cross requires vector operands", path);
      }
      return Shape::vector3;
    case Op::dot:
      if (arg(0) != Shape::vector3 || arg(1) != Shape::vector3) throw TypeError("dot requires vector operands", path);
      return Shape::scalar;
    case Op::abs:
      if (arg(0) != Shape::scalar) throw TypeError("abs requires a scalar operand", path);
      return Shape::scalar;
  }
  throw TypeError("unknown node", path);
}

}  // namespace

Expr trace(const std::string& field, Side side) { return make_named(Op::trace, field, side); }
Expr interior(const std::string& field) { return trace(field, Side::interior); }
Expr exterior(const std::string& field) { return trace(field, Side::exterior); }
Expr normal() { return make(Op::normal); }

Expr constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = v;
  return n;
}

Expr param(const std::string& name) { return make_named(Op::param, name); }
Expr vec(Expr x, Expr y, Expr z) { return make(Op::vec, {std::move(x), std::move(y), std::move(z)}); }
Expr cross(Expr a, Expr b) { return make(Op::cross, {std::move(a), std::move(b)}); }
Expr dot(Expr a, Expr b) { return make(Op::dot, {std::move(a), std::move(b)}); }
Expr abs(Expr a) { return make(Op::abs, {std::move(a)}); }
Expr jump(const std::string& field) { return make_named(Op::jump, field); }
Expr average(const std::string& field) { return make_named(Op::average, field); }
Expr operator+(Expr a, Expr b) { return make(Op::add, {std::move(a), std::move(b)}); }
Expr operator-(Expr a, Expr b) { return make(Op::sub, {std::move(a), std::move(b)}); }
Expr operator-(Expr a) { return make(Op::neg, {std::move(a)}); }
Expr operator*(Expr s, Expr a) { return make(Op::scale, {std::move(s), std::move(a)}); }
Expr operator*(double s, Expr a) { return constant(s) * std::move(a); }

Shape typecheck(const Expr& expr, const std::vector<FieldGroup>& fields) { return check(expr, fields, "root"); }

void typecheck(const FluxSpec& spec) {
  if (spec.outputs.size() != spec.fields.size()) throw Error("flux spec must have one output per field group");
  for (size_t i = 0; i < spec.outputs.size(); ++i) {
    const auto& [name, expr] = spec.outputs[i];
    if (name != spec.fields[i].name) {
      throw Error("flux output '" + name + "' does not match field group '" + spec.fields[i].name + "'");
    }
    if (typecheck(expr, spec.fields) != spec.fields[i].shape()) {
      throw TypeError("output shape does not match field '" + name + "'", "root");
    }
  }
}

}  // namespace dgforge::flux
