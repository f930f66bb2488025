#include <cmath>

#include "dgforge/physics.hpp"

namespace dgforge {

StepController StepController::make(const Discretization& disc, double dt_factor) {
  if (!(dt_factor > 0.0)) throw Error("dt factor must be positive");
  StepController s;
  s.dt_factor = dt_factor;
  s.h_min = disc.h_min;
  const double n = disc.order();
  s.dt = dt_factor * disc.h_min / (n * n);
  return s;
}

Rk4Workspace Rk4Workspace::make(DgOperator& op) {
  return {op.allocate_state(), op.allocate_state(), op.allocate_state(), op.allocate_state()};
}

void rk4_step(DgOperator& op, FieldState& u, double dt, Rk4Workspace& w, const RhsFunction& rhs) {
  const RhsFunction f = rhs ? rhs : RhsFunction([&op](const FieldState& x, double t, FieldState& out) { op.rhs(x, t, out); });
  const double t = u.t;
  f(u, t, w.k);
  op.axpby(1.0, u, dt / 6.0, w.k, w.acc_a);
  op.axpby(1.0, u, dt / 2.0, w.k, w.stage);
  f(w.stage, t + dt / 2.0, w.k);
  op.axpby(1.0, w.acc_a, dt / 3.0, w.k, w.acc_b);
  op.axpby(1.0, u, dt / 2.0, w.k, w.stage);
  f(w.stage, t + dt / 2.0, w.k);
  op.axpby(1.0, w.acc_b, dt / 3.0, w.k, w.acc_a);
  op.axpby(1.0, u, dt, w.k, w.stage);
  f(w.stage, t + dt, w.k);
  op.axpby(1.0, w.acc_a, dt / 6.0, w.k, u);
  u.t = t + dt;
}

bool state_is_finite(DgOperator& op, const FieldState& state) {
  const auto& layout = op.discretization().layout;
  for (const auto& v : op.download(state)) {
    for (std::int64_t w = 0; w < layout.total_words(); ++w) {
      if (layout.is_data_word(w) && !std::isfinite(v[w])) return false;
    }
  }
  return true;
}

}  // namespace dgforge
