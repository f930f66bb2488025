#include <random>

#include "doctest.h"
#include "dgforge/fluxdsl.hpp"
#include "dgforge/physics.hpp"

using namespace dgforge;
using namespace dgforge::flux;

namespace {

const std::vector<FieldGroup> kMaxwellFields{{"E", {"Ex", "Ey", "Ez"}}, {"H", {"Hx", "Hy", "Hz"}}};

Expr maxwell_e(Expr a) { return -0.5 * cross(normal(), jump("H") - a * cross(normal(), jump("E"))); }

Value vec3(double x, double y, double z) { return {Shape::vector3, {x, y, z}}; }

std::array<double, 3> random_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::array<double, 3> n{g(rng), g(rng), g(rng)};
  double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  for (auto& x : n) x /= len;
  return n;
}

// Interprets every output of spec and flattens to components.
std::vector<double> interpret_all(const FluxSpec& spec, const std::vector<double>& minus,
                                  const std::vector<double>& plus, const std::array<double, 3>& n) {
  std::map<std::string, TracePair> traces;
  size_t c = 0;
  for (const auto& f : spec.fields) {
    TracePair t;
    t.minus.shape = t.plus.shape = f.shape();
    for (size_t i = 0; i < f.components.size(); ++i, ++c) {
      t.minus.v[i] = minus[c];
      t.plus.v[i] = plus[c];
    }
    traces[f.name] = t;
  }
  std::vector<double> out;
  for (size_t g = 0; g < spec.outputs.size(); ++g) {
    Value v = interpret(spec.outputs[g].second, traces, n, spec.params);
    for (size_t i = 0; i < spec.fields[g].components.size(); ++i) out.push_back(v.v[i]);
  }
  return out;
}

}  // namespace

TEST_CASE("shape checking") {
  CHECK(typecheck(cross(normal(), jump("H")), kMaxwellFields) == Shape::vector3);
  CHECK(typecheck(dot(normal(), normal()), kMaxwellFields) == Shape::scalar);
  try {
    typecheck(cross(constant(1), normal()), kMaxwellFields);
    FAIL("no error");
  } catch (const TypeError& e) {
    CHECK(std::string(e.what()).find("cross requires vector operands") != std::string::npos);
    CHECK(e.path() == "root");
  }
  try {
    typecheck(jump("E") + cross(normal(), dot(normal(), jump("H"))), kMaxwellFields);
    FAIL("no error");
  } catch (const TypeError& e) {
    CHECK(e.path() == "root.add[1]");
  }
  CHECK_THROWS_AS(typecheck(jump("Q"), kMaxwellFields), TypeError);
  CHECK_THROWS_AS(typecheck(jump("E") + normal() * constant(1), kMaxwellFields), TypeError);
  typecheck(maxwell_system().flux);
  typecheck(advection_system({1, 0, 0}).flux);
}

TEST_CASE("interpreter values") {
  TracePair e{vec3(1, 2, 3), vec3(1, 2, 3)}, h{vec3(-1, 0, 4), vec3(-1, 0, 4)};
  std::map<std::string, TracePair> tr{{"E", e}, {"H", h}};
  Value z = interpret(maxwell_e(param("alpha")), tr, {0.6, 0.8, 0.0}, {{"alpha", 1.0}});
  for (double x : z.v) CHECK(x == 0.0);

  TracePair hj{vec3(0, 0, 1), vec3(0, 0, 0)};
  tr = {{"E", {vec3(0, 0, 0), vec3(0, 0, 0)}}, {"H", hj}};
  Value c = interpret(0.5 * cross(normal(), jump("H")), tr, {1, 0, 0});
  CHECK(c.v[0] == 0.0);
  CHECK(c.v[1] == -0.5);
  CHECK(c.v[2] == 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 100; ++i) {
    TracePair p{vec3(u(rng), u(rng), u(rng)), vec3(u(rng), u(rng), u(rng))};
    Value j = interpret(jump("E"), {{"E", p}}, {0, 0, 1});
    for (int d = 0; d < 3; ++d) CHECK(j.v[d] == p.minus.v[d] - p.plus.v[d]);
  }
  CHECK_THROWS_AS(interpret(jump("E"), {}, {0, 0, 1}), Error);
  CHECK_THROWS_AS(interpret(param("beta"), {}, {0, 0, 1}), Error);
}

TEST_CASE("physics fluxes are consistent") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& sys : {maxwell_system(0.0), maxwell_system(1.0), advection_system({1, 0.5, 0.25}, 1.0),
                          advection_system({-0.3, 2, 1}, 0.0)}) {
    for (int r = 0; r < 20; ++r) {
      std::vector<double> m(sys.num_fields());
      for (auto& x : m) x = u(rng);
      auto out = interpret_all(sys.flux, m, m, random_normal(rng));
      for (double x : out) CHECK(x == 0.0);
    }
  }
}

TEST_CASE("maxwell lowering") {
  auto l = lower(maxwell_system(1.0).flux);
  CHECK(l.outputs.size() == 6u);
  CHECK(l.components.size() == 6u);
  auto lines = emit_statements(l, EmitStyle{"double", [](double v) { return std::to_string(v); },
                                            [](int c, Side s) { return std::string(s == Side::interior ? "m" : "p") +
                                                                       std::to_string(c); },
                                            [](int a) { return "n" + std::to_string(a); },
                                            [](int c) { return "out" + std::to_string(c); }, "t"});
  int assignments = 0;
  for (const auto& s : lines) assignments += s.rfind("out", 0) == 0;
  CHECK(assignments == 6);

  // alpha folded to zero leaves the central flux only
  FluxSpec central = maxwell_system(0.0).flux;
  FluxSpec plain{kMaxwellFields,
                 {{"E", -0.5 * cross(normal(), jump("H"))}, {"H", 0.5 * cross(normal(), jump("E"))}},
                 {}};
  auto lc = lower(central), lp = lower(plain);
  CHECK(lc.flop_count() == lp.flop_count());
  CHECK(lc.flop_count() < l.flop_count());
}

TEST_CASE("lowered evaluation matches interpreter") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const auto& sys : {maxwell_system(1.0), maxwell_system(0.0), maxwell_system(0.5),
                          advection_system({1, 0.5, 0.25}, 1.0), advection_system({0.2, -1, 0.7}, 0.3)}) {
    auto l = lower(sys.flux);
    for (int r = 0; r < 200; ++r) {
      std::vector<double> m(sys.num_fields()), p(sys.num_fields());
      for (auto& x : m) x = u(rng);
      for (auto& x : p) x = u(rng);
      auto n = random_normal(rng);
      auto ref = interpret_all(sys.flux, m, p, n);
      auto got = evaluate(l, m, p, n);
      double scale = 0.0;
      for (double x : ref) scale = std::max(scale, std::abs(x));
      for (size_t c = 0; c < ref.size(); ++c) CHECK(std::abs(got[c] - ref[c]) <= 1e-14 * std::max(scale, 1.0));
    }
  }
}

TEST_CASE("hash consing shares subexpressions") {
  // (u- - u+) appears once
  auto l = lower(FluxSpec{{{"u", {"u"}}}, {{"u", jump("u") + jump("u")}}, {}});
  CHECK(l.flop_count() == 2);
  CHECK(l.temporaries.size() == 1u);
  CHECK_THROWS(lower(FluxSpec{{{"u", {"u"}}}, {{"u", param("x") * jump("u")}}, {}}));
}
