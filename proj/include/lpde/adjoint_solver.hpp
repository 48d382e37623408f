#pragma once

#include <array>
#include <vector>

#include "lpde/fields.hpp"
#include "lpde/forward_solver.hpp"
#include "lpde/invariants.hpp"

namespace lpde {

/// Linearization coefficients of the right-hand sides, one Field per channel:
///   A_c = dF_u/du_c, B_c = dF_v/du_c, C_c = dF_u/dv_c, D_c = dF_v/dv_c.
struct SigmaFields {
  std::array<Field, kChannelCount> A, B, C, D;
};

SigmaFields sigma_fields(const Field& u, const Field& v, const Coeffs& a, const Coeffs& b);

/// Which sigma family to corrupt; only used to test that gradient checking catches errors.
enum class SigmaFamily { none, A, B, C, D };

struct AdjointOptions {
  SigmaFamily negate_family = SigmaFamily::none;
};

/// Adjoint states phi (of u) and psi (of v) at time indices 0..steps.
struct AdjointTrajectory {
  double dt = 0.0;
  std::vector<Field> phi;
  std::vector<Field> psi;
};

/// One backward step from time index i+1 to i:
///   phi_i = phi_{i+1} + dt * sum_c (-1)^{p+q} D^{pq}[A_c phi_{i+1} + B_c psi_{i+1}]
///   psi_i = psi_{i+1} + dt * sum_c (-1)^{p+q} D^{pq}[C_c phi_{i+1} + D_c psi_{i+1}]
/// with sigma evaluated at the forward state (u_i, v_i) under the step-i coefficients.
/// The products are formed first and then differentiated with the forward stencils.
/// Throws BlowUpError(time_index) on divergence.
FieldPair adjoint_step(const Field& phi, const Field& psi, const Field& u, const Field& v,
                       const Coeffs& a, const Coeffs& b, double dt, int time_index,
                       const AdjointOptions& options = {});

/// Backward sweep from phi(1) = residual, psi(1) = 0.
AdjointTrajectory solve_adjoint(const Trajectory& traj, const CoefficientSchedule& sched,
                                const Field& residual, const AdjointOptions& options = {});

}  // namespace lpde
