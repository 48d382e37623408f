#include "lpde/forward_solver.hpp"

#include <cmath>
#include <string>

#include "lpde/error.hpp"

namespace lpde {

CoefficientSchedule CoefficientSchedule::zeros(double dt) {
  const int n = step_count(dt);
  CoefficientSchedule s;
  s.dt = dt;
  s.a.assign(n, Coeffs{});
  s.b.assign(n, Coeffs{});
  return s;
}

void CoefficientSchedule::validate() const {
  const int n = step_count(dt);
  if (n < 1) throw InvalidArgument("time step is larger than the unit time horizon");
  if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n) {
    throw InvalidArgument("schedule has " + std::to_string(a.size()) + "/" +
                          std::to_string(b.size()) + " steps, expected " + std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kInvariantCount; ++j) {
      if (!std::isfinite(a[i][j]) || !std::isfinite(b[i][j])) {
        throw InvalidArgument("schedule entry at step " + std::to_string(i) + " is not finite");
      }
    }
  }
}

FieldPair rhs(const Field& u, const Field& v, const Coeffs& a, const Coeffs& b) {
  if (!u.same_grid(v)) throw InvalidArgument("rhs: u and v live on different grids");
  FieldPair out{Field(u.width(), u.height(), u.pad()), Field(u.width(), u.height(), u.pad())};
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      const Jet ju = jet_at(u, x, y);
      const Jet jv = jet_at(v, x, y);
      out.u(x, y) = weighted_invariant_sum(a, ju, jv);
      out.v(x, y) = weighted_invariant_sum(b, jv, ju);
    }
  }
  return out;
}

FieldPair step(const Field& u, const Field& v, const Coeffs& a, const Coeffs& b, double dt,
               int time_index) {
  if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
  FieldPair next = rhs(u, v, a, b);
  bool ok = true;
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      const double nu = u(x, y) + dt * next.u(x, y);
      const double nv = v(x, y) + dt * next.v(x, y);
      // The negated comparison also catches NaN.
      if (!(std::abs(nu) <= kBlowUpBound) || !(std::abs(nv) <= kBlowUpBound)) ok = false;
      next.u(x, y) = nu;
      next.v(x, y) = nv;
    }
  }
  if (!ok) throw BlowUpError(time_index + 1);
  return next;
}

Trajectory evolve(const Field& image, const CoefficientSchedule& sched) {
  sched.validate();
  Trajectory traj;
  traj.dt = sched.dt;
  traj.u.reserve(sched.steps() + 1);
  traj.v.reserve(sched.steps() + 1);
  Field start = image;
  start.zero_halo();
  traj.u.push_back(start);
  traj.v.push_back(start);
  for (int i = 0; i < sched.steps(); ++i) {
    FieldPair next = step(traj.u[i], traj.v[i], sched.a[i], sched.b[i], sched.dt, i);
    traj.u.push_back(std::move(next.u));
    traj.v.push_back(std::move(next.v));
  }
  return traj;
}

Field evolve_output(const Field& image, const CoefficientSchedule& sched) {
  sched.validate();
  FieldPair state{image, image};
  state.u.zero_halo();
  state.v.zero_halo();
  for (int i = 0; i < sched.steps(); ++i) {
    state = step(state.u, state.v, sched.a[i], sched.b[i], sched.dt, i);
  }
  return std::move(state.u);
}

}  // namespace lpde
