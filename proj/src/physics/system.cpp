#include "dgforge/physics.hpp"

namespace dgforge {

using namespace flux;

SystemDefinition maxwell_system(double alpha) {
  SystemDefinition s;
  s.name = "maxwell";
  s.fields = {"Ex", "Ey", "Ez", "Hx", "Hy", "Hz"};
  s.alpha = alpha;
  // dE/dt = curl H, dH/dt = -curl E; fields Ex..Hz are 0..5.
  s.volume_terms = {
      {0, 5, 1, 1.0},  {0, 4, 2, -1.0}, {1, 3, 2, 1.0},  {1, 5, 0, -1.0}, {2, 4, 0, 1.0},  {2, 3, 1, -1.0},
      {3, 2, 1, -1.0}, {3, 1, 2, 1.0},  {4, 0, 2, -1.0}, {4, 2, 0, 1.0},  {5, 1, 0, -1.0}, {5, 0, 1, 1.0},
  };
  s.flux.fields = {{"E", {"Ex", "Ey", "Ez"}}, {"H", {"Hx", "Hy", "Hz"}}};
  const Expr n = normal();
  const Expr a = param("alpha");
  s.flux.outputs = {
      {"E", -0.5 * cross(n, jump("H") - a * cross(n, jump("E")))},
      {"H", 0.5 * cross(n, jump("E") + a * cross(n, jump("H")))},
  };
  s.flux.params = {{"alpha", alpha}};
  return s;
}

SystemDefinition advection_system(const std::array<double, 3>& velocity, double alpha) {
  SystemDefinition s;
  s.name = "advection";
  s.fields = {"u"};
  s.velocity = velocity;
  s.alpha = alpha;
  for (int nu = 0; nu < 3; ++nu) {
    if (velocity[nu] != 0.0) s.volume_terms.push_back({0, 0, nu, -velocity[nu]});
  }
  s.flux.fields = {{"u", {"u"}}};
  const Expr an = dot(vec(param("ax"), param("ay"), param("az")), normal());
  s.flux.outputs = {{"u", 0.5 * ((an - param("alpha") * abs(an)) * jump("u"))}};
  s.flux.params = {{"ax", velocity[0]}, {"ay", velocity[1]}, {"az", velocity[2]}, {"alpha", alpha}};
  return s;
}

BoundaryKind SystemDefinition::boundary_kind(const std::string& tag, const Point& normal) const {
  if (name == "maxwell") {
    if (tag == "pec" || tag == kDefaultBoundaryTag) return BoundaryKind::pec;
  } else {
    if (tag == "inflow") return BoundaryKind::inflow;
    if (tag == "outflow") return BoundaryKind::outflow;
    if (tag == kDefaultBoundaryTag) {
      const double an = velocity[0] * normal[0] + velocity[1] * normal[1] + velocity[2] * normal[2];
      return an < 0.0 ? BoundaryKind::inflow : BoundaryKind::outflow;
    }
  }
  throw Error("unknown boundary tag '" + tag + "' for system " + name);
}

std::vector<double> ghost_trace(const SystemDefinition& system, const std::string& tag,
                                const std::vector<double>& interior, const Point& normal, const Point& x, double t,
                                const FieldFunction& data) {
  if (static_cast<int>(interior.size()) != system.num_fields()) throw Error("ghost_trace: wrong trace size");
  switch (system.boundary_kind(tag, normal)) {
    case BoundaryKind::pec: {
      std::vector<double> g = interior;
      for (int c = 0; c < 3; ++c) g[c] = -g[c];
      return g;
    }
    case BoundaryKind::outflow: return interior;
    case BoundaryKind::inflow: return data ? data(x, t) : std::vector<double>(interior.size(), 0.0);
  }
  return interior;
}

}  // namespace dgforge
