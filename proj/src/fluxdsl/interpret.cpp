#include <cmath>

#include "dgforge/fluxdsl.hpp"

namespace dgforge::flux {

namespace {

Value scalar(double x) { return {Shape::scalar, {x, 0, 0}}; }

Value vector(double x, double y, double z) { return {Shape::vector3, {x, y, z}}; }

int width(const Value& v) { return v.shape == Shape::vector3 ? 3 : 1; }

template <class F>
Value zip(const Value& a, const Value& b, F f) {
  Value r{a.shape, {0, 0, 0}};
  for (int i = 0; i < width(a); ++i) r.v[i] = f(a.v[i], b.v[i]);
  return r;
}

const TracePair& lookup(const std::map<std::string, TracePair>& traces, const std::string& name) {
  auto it = traces.find(name);
  if (it == traces.end()) throw Error("unbound field '" + name + "'");
  return it->second;
}

}  // namespace

Value interpret(const Expr& e, const std::map<std::string, TracePair>& traces, const std::array<double, 3>& n,
                const std::map<std::string, double>& params) {
  auto arg = [&](size_t i) { return interpret(e->args.at(i), traces, n, params); };
  switch (e->op) {
    case Op::trace: {
      const auto& t = lookup(traces, e->name);
      return e->side == Side::interior ? t.minus : t.plus;
    }
    case Op::jump: {
      const auto& t = lookup(traces, e->name);
      return zip(t.minus, t.plus, [](double a, double b) { return a - b; });
    }
    case Op::average: {
      const auto& t = lookup(traces, e->name);
      return zip(t.minus, t.plus, [](double a, double b) { return 0.5 * (a + b); });
    }
    case Op::normal: return vector(n[0], n[1], n[2]);
    case Op::constant: return scalar(e->value);
    case Op::param: {
      auto it = params.find(e->name);
      if (it == params.end()) throw Error("unbound parameter '" + e->name + "'");
      return scalar(it->second);
    }
    case Op::vec: return vector(arg(0).v[0], arg(1).v[0], arg(2).v[0]);
    case Op::add: return zip(arg(0), arg(1), [](double a, double b) { return a + b; });
    case Op::sub: return zip(arg(0), arg(1), [](double a, double b) { return a - b; });
    case Op::neg: {
      Value a = arg(0);
      for (auto& x : a.v) x = -x;
      return a;
    }
    case Op::scale: {
      const double s = arg(0).v[0];
      Value a = arg(1);
      for (auto& x : a.v) x *= s;
      return a;
    }
    case Op::cross: {
      const Value a = arg(0), b = arg(1);
      return vector(a.v[1] * b.v[2] - a.v[2] * b.v[1], a.v[2] * b.v[0] - a.v[0] * b.v[2],
                    a.v[0] * b.v[1] - a.v[1] * b.v[0]);
    }
    case Op::dot: {
      const Value a = arg(0), b = arg(1);
      return scalar(a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2]);
    }
    case Op::abs: return scalar(std::fabs(arg(0).v[0]));
  }
  throw Error("unknown flux node");
}

}  // namespace dgforge::flux
