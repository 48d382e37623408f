#include "lpde/adjoint_solver.hpp"

#include <cmath>

#include "lpde/error.hpp"

namespace lpde {
namespace {

std::array<Field, kChannelCount> blank_family(const Field& ref) {
  std::array<Field, kChannelCount> fam;
  for (auto& f : fam) f = Field(ref.width(), ref.height(), ref.pad());
  return fam;
}

void negate(std::array<Field, kChannelCount>& fam) {
  for (auto& f : fam)
    for (double& x : f.values()) x = -x;
}

// sum_c (-1)^{p+q} D^{pq}[first_c * p1 + second_c * p2] on the interior.
Field divergence_form(const std::array<Field, kChannelCount>& first,
                      const std::array<Field, kChannelCount>& second, const Field& p1,
                      const Field& p2) {
  Field out(p1.width(), p1.height(), p1.pad());
  Field product(p1.width(), p1.height(), p1.pad());
  for (Channel c : kChannels) {
    const int k = static_cast<int>(c);
    for (int y = 0; y < p1.height(); ++y)
      for (int x = 0; x < p1.width(); ++x)
        product(x, y) = first[k](x, y) * p1(x, y) + second[k](x, y) * p2(x, y);
    const auto [p, q] = channel_orders(c);
    const double sign = (p + q) % 2 == 0 ? 1.0 : -1.0;
    for (int y = 0; y < p1.height(); ++y)
      for (int x = 0; x < p1.width(); ++x) out(x, y) += sign * jet_at(product, x, y)[k];
  }
  return out;
}

}  // namespace

SigmaFields sigma_fields(const Field& u, const Field& v, const Coeffs& a, const Coeffs& b) {
  if (!u.same_grid(v)) throw InvalidArgument("sigma_fields: u and v live on different grids");
  SigmaFields s{blank_family(u), blank_family(u), blank_family(u), blank_family(u)};
  Jet du_a, dv_a, dv_b, du_b;
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      const Jet ju = jet_at(u, x, y);
      const Jet jv = jet_at(v, x, y);
      weighted_invariant_partials(a, ju, jv, du_a, dv_a);
      // F_v = sum_j b_j inv_j(v, u): v takes the first argument slot.
      weighted_invariant_partials(b, jv, ju, dv_b, du_b);
      for (int k = 0; k < kChannelCount; ++k) {
        s.A[k](x, y) = du_a[k];
        s.C[k](x, y) = dv_a[k];
        s.B[k](x, y) = du_b[k];
        s.D[k](x, y) = dv_b[k];
      }
    }
  }
  return s;
}

FieldPair adjoint_step(const Field& phi, const Field& psi, const Field& u, const Field& v,
                       const Coeffs& a, const Coeffs& b, double dt, int time_index,
                       const AdjointOptions& options) {
  if (!phi.same_grid(psi) || !phi.same_grid(u)) {
    throw InvalidArgument("adjoint_step: grid mismatch");
  }
  SigmaFields s = sigma_fields(u, v, a, b);
  switch (options.negate_family) {
    case SigmaFamily::A: negate(s.A); break;
    case SigmaFamily::B: negate(s.B); break;
    case SigmaFamily::C: negate(s.C); break;
    case SigmaFamily::D: negate(s.D); break;
    case SigmaFamily::none: break;
  }
  FieldPair out{divergence_form(s.A, s.B, phi, psi), divergence_form(s.C, s.D, phi, psi)};
  bool ok = true;
  for (int y = 0; y < phi.height(); ++y) {
    for (int x = 0; x < phi.width(); ++x) {
      const double np = phi(x, y) + dt * out.u(x, y);
      const double ns = psi(x, y) + dt * out.v(x, y);
      if (!(std::abs(np) <= kBlowUpBound) || !(std::abs(ns) <= kBlowUpBound)) ok = false;
      out.u(x, y) = np;
      out.v(x, y) = ns;
    }
  }
  if (!ok) throw BlowUpError(time_index);
  return out;
}

AdjointTrajectory solve_adjoint(const Trajectory& traj, const CoefficientSchedule& sched,
                                const Field& residual, const AdjointOptions& options) {
  sched.validate();
  const int n = sched.steps();
  if (traj.steps() != n) throw InvalidArgument("solve_adjoint: trajectory/schedule length mismatch");
  if (!residual.same_grid(traj.u.front())) throw InvalidArgument("solve_adjoint: grid mismatch");

  AdjointTrajectory adj;
  adj.dt = sched.dt;
  adj.phi.resize(n + 1);
  adj.psi.resize(n + 1);
  adj.phi[n] = residual;
  adj.phi[n].zero_halo();
  adj.psi[n] = Field(residual.width(), residual.height(), residual.pad());
  for (int i = n - 1; i >= 0; --i) {
    FieldPair prev = adjoint_step(adj.phi[i + 1], adj.psi[i + 1], traj.u[i], traj.v[i],
                                  sched.a[i], sched.b[i], sched.dt, i, options);
    adj.phi[i] = std::move(prev.u);
    adj.psi[i] = std::move(prev.v);
  }
  return adj;
}

}  // namespace lpde
