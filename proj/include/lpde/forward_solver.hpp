#pragma once

#include <vector>

#include "lpde/fields.hpp"
#include "lpde/invariants.hpp"

namespace lpde {

/// |value| above this on [0,1]-normalized data is treated as divergence.
inline constexpr double kBlowUpBound = 10.0;

/// Piecewise-constant control functions a_j(t), b_j(t): a[i] applies on [i*dt, (i+1)*dt).
struct CoefficientSchedule {
  double dt = 0.0;
  std::vector<Coeffs> a;
  std::vector<Coeffs> b;

  int steps() const noexcept { return static_cast<int>(a.size()); }

  static CoefficientSchedule zeros(double dt);
  /// Throws InvalidArgument on a bad dt, shape mismatch or non-finite entry.
  void validate() const;
};

/// Stored states u(i*dt), v(i*dt) for i = 0..steps.
struct Trajectory {
  double dt = 0.0;
  std::vector<Field> u;
  std::vector<Field> v;

  int steps() const noexcept { return static_cast<int>(u.size()) - 1; }
  const Field& output() const { return u.back(); }
};

struct FieldPair {
  Field u;
  Field v;
};

/// F_u = sum_j a_j inv_j(u, v) and F_v = sum_j b_j inv_j(v, u) on the interior.
FieldPair rhs(const Field& u, const Field& v, const Coeffs& a, const Coeffs& b);

/// One forward Euler step. Throws BlowUpError(time_index + 1) if the new state
/// is non-finite or exceeds kBlowUpBound.
FieldPair step(const Field& u, const Field& v, const Coeffs& a, const Coeffs& b, double dt,
               int time_index = 0);

/// Evolves u = v = image to t = 1, keeping every intermediate state.
Trajectory evolve(const Field& image, const CoefficientSchedule& sched);

/// Same dynamics as evolve() but only the final u is kept.
Field evolve_output(const Field& image, const CoefficientSchedule& sched);

}  // namespace lpde
