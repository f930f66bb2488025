#include <cmath>
#include <numbers>

#include "dgforge/physics.hpp"

namespace dgforge {

namespace {

constexpr std::array<double, 3> kVelocity{1.0, 0.5, 0.25};

Solution maxwell_cavity(double alpha) {
  // (1,0,1) mode of the unit-cube PEC cavity.
  Solution s;
  s.name = "maxwell-cavity-101";
  s.system = maxwell_system(alpha);
  s.default_t_final = 1.0;
  s.exact = [](const Point& x, double t) {
    const double pi = std::numbers::pi;
    const double w = pi * std::sqrt(2.0);
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sz = std::sin(pi * x[2]), cz = std::cos(pi * x[2]);
    return std::vector<double>{0.0, sx * sz * std::cos(w * t), 0.0, (pi / w) * sx * cz * std::sin(w * t), 0.0,
                               -(pi / w) * cx * sz * std::sin(w * t)};
  };
  return s;
}

Solution advect_gauss(double alpha) {
  Solution s;
  s.name = "advect-gauss";
  s.system = advection_system(kVelocity, alpha);
  s.default_t_final = 0.2;
  s.exact = [](const Point& x, double t) {
    const double sigma = 0.35;
    double r2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double c = 0.4 + kVelocity[d] * t;
      r2 += (x[d] - c) * (x[d] - c);
    }
    return std::vector<double>{std::exp(-r2 / (sigma * sigma))};
  };
  return s;
}

Solution advect_plane(double alpha) {
  Solution s;
  s.name = "advect-plane";
  s.system = advection_system(kVelocity, alpha);
  s.default_t_final = 0.2;
  s.exact = [](const Point& x, double t) {
    double phase = 0.0;
    for (int d = 0; d < 3; ++d) phase += x[d] - kVelocity[d] * t;
    return std::vector<double>{std::sin(std::numbers::pi * phase)};
  };
  return s;
}

}  // namespace

std::vector<std::string> solution_names() { return {"maxwell-cavity-101", "advect-gauss", "advect-plane"}; }

Solution make_solution(const std::string& name, double alpha) {
  if (name == "maxwell-cavity-101") return maxwell_cavity(alpha);
  if (name == "advect-gauss") return advect_gauss(alpha);
  if (name == "advect-plane") return advect_plane(alpha);
  throw Error("unknown case '" + name + "'");
}

}  // namespace dgforge
