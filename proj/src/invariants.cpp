#include "lpde/invariants.hpp"

#include "lpde/error.hpp"

namespace lpde {
namespace {

constexpr int V = 0, X = 1, Y = 2, XX = 3, XY = 4, YY = 5;

void check_grids(const DerivativeChannels& cu, const DerivativeChannels& cv) {
  if (!cu[Channel::value].same_grid(cv[Channel::value])) {
    throw InvalidArgument("invariants: u and v live on different grids");
  }
}

}  // namespace

InvariantValues invariants_at(const Jet& u, const Jet& v) noexcept {
  const double ux = u[X], uy = u[Y], uxx = u[XX], uxy = u[XY], uyy = u[YY];
  const double vx = v[X], vy = v[Y], vxx = v[XX], vxy = v[XY], vyy = v[YY];
  InvariantValues r;
  r[0] = 1.0;
  r[1] = v[V];
  r[2] = u[V];
  r[3] = vx * vx + vy * vy;
  r[4] = ux * ux + uy * uy;
  r[5] = vx * ux + vy * uy;
  r[6] = vxx + vyy;
  r[7] = uxx + uyy;
  r[8] = vx * vx * vxx + 2.0 * vx * vy * vxy + vy * vy * vyy;
  r[9] = vx * vx * uxx + 2.0 * vx * vy * uxy + vy * vy * uyy;
  r[10] = vx * ux * vxx + (vx * uy + vy * ux) * vxy + vy * uy * vyy;
  r[11] = vx * ux * uxx + (vx * uy + vy * ux) * uxy + vy * uy * uyy;
  r[12] = ux * ux * vxx + 2.0 * ux * uy * vxy + uy * uy * vyy;
  r[13] = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy;
  r[14] = vxx * vxx + 2.0 * vxy * vxy + vyy * vyy;
  r[15] = vxx * uxx + 2.0 * vxy * uxy + vyy * uyy;
  r[16] = uxx * uxx + 2.0 * uxy * uxy + uyy * uyy;
  return r;
}

double weighted_invariant_sum(const Coeffs& w, const Jet& u, const Jet& v) noexcept {
  const InvariantValues inv = invariants_at(u, v);
  double s = 0.0;
  for (int j = 0; j < kInvariantCount; ++j) s += w[j] * inv[j];
  return s;
}

void invariant_partials(int j, const Jet& u, const Jet& v, Jet& du, Jet& dv) noexcept {
  du.fill(0.0);
  dv.fill(0.0);
  const double ux = u[X], uy = u[Y], uxx = u[XX], uxy = u[XY], uyy = u[YY];
  const double vx = v[X], vy = v[Y], vxx = v[XX], vxy = v[XY], vyy = v[YY];
  switch (j) {
    case 0:
      break;
    case 1:
      dv[V] = 1.0;
      break;
    case 2:
      du[V] = 1.0;
      break;
    case 3:
      dv[X] = 2.0 * vx;
      dv[Y] = 2.0 * vy;
      break;
    case 4:
      du[X] = 2.0 * ux;
      du[Y] = 2.0 * uy;
      break;
    case 5:
      du[X] = vx;
      du[Y] = vy;
      dv[X] = ux;
      dv[Y] = uy;
      break;
    case 6:
      dv[XX] = 1.0;
      dv[YY] = 1.0;
      break;
    case 7:
      du[XX] = 1.0;
      du[YY] = 1.0;
      break;
    case 8:
      dv[X] = 2.0 * vx * vxx + 2.0 * vy * vxy;
      dv[Y] = 2.0 * vx * vxy + 2.0 * vy * vyy;
      dv[XX] = vx * vx;
      dv[XY] = 2.0 * vx * vy;
      dv[YY] = vy * vy;
      break;
    case 9:
      dv[X] = 2.0 * vx * uxx + 2.0 * vy * uxy;
      dv[Y] = 2.0 * vx * uxy + 2.0 * vy * uyy;
      du[XX] = vx * vx;
      du[XY] = 2.0 * vx * vy;
      du[YY] = vy * vy;
      break;
    case 10:
      dv[X] = ux * vxx + uy * vxy;
      dv[Y] = ux * vxy + uy * vyy;
      du[X] = vx * vxx + vy * vxy;
      du[Y] = vx * vxy + vy * vyy;
      dv[XX] = vx * ux;
      dv[XY] = vx * uy + vy * ux;
      dv[YY] = vy * uy;
      break;
    case 11:
      dv[X] = ux * uxx + uy * uxy;
      dv[Y] = ux * uxy + uy * uyy;
      du[X] = vx * uxx + vy * uxy;
      du[Y] = vx * uxy + vy * uyy;
      du[XX] = vx * ux;
      du[XY] = vx * uy + vy * ux;
      du[YY] = vy * uy;
      break;
    case 12:
      du[X] = 2.0 * ux * vxx + 2.0 * uy * vxy;
      du[Y] = 2.0 * ux * vxy + 2.0 * uy * vyy;
      dv[XX] = ux * ux;
      dv[XY] = 2.0 * ux * uy;
      dv[YY] = uy * uy;
      break;
    case 13:
      du[X] = 2.0 * ux * uxx + 2.0 * uy * uxy;
      du[Y] = 2.0 * ux * uxy + 2.0 * uy * uyy;
      du[XX] = ux * ux;
      du[XY] = 2.0 * ux * uy;
      du[YY] = uy * uy;
      break;
    case 14:
      dv[XX] = 2.0 * vxx;
      dv[XY] = 4.0 * vxy;
      dv[YY] = 2.0 * vyy;
      break;
    case 15:
      dv[XX] = uxx;
      dv[XY] = 2.0 * uxy;
      dv[YY] = uyy;
      du[XX] = vxx;
      du[XY] = 2.0 * vxy;
      du[YY] = vyy;
      break;
    case 16:
      du[XX] = 2.0 * uxx;
      du[XY] = 4.0 * uxy;
      du[YY] = 2.0 * uyy;
      break;
    default:
      break;
  }
}

void weighted_invariant_partials(const Coeffs& w, const Jet& u, const Jet& v, Jet& du,
                                 Jet& dv) noexcept {
  du.fill(0.0);
  dv.fill(0.0);
  Jet pu, pv;
  for (int j = 1; j < kInvariantCount; ++j) {
    if (w[j] == 0.0) continue;
    invariant_partials(j, u, v, pu, pv);
    for (int c = 0; c < kChannelCount; ++c) {
      du[c] += w[j] * pu[c];
      dv[c] += w[j] * pv[c];
    }
  }
}

InvariantStack compute_invariants(const DerivativeChannels& cu, const DerivativeChannels& cv) {
  check_grids(cu, cv);
  const Field& ref = cu[Channel::value];
  InvariantStack stack;
  for (auto& e : stack.entries) e = Field(ref.width(), ref.height(), ref.pad());
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      const InvariantValues inv = invariants_at(cu.jet(x, y), cv.jet(x, y));
      for (int j = 0; j < kInvariantCount; ++j) stack.entries[j](x, y) = inv[j];
    }
  }
  return stack;
}

InvariantJacobian::InvariantJacobian(const DerivativeChannels& cu, const DerivativeChannels& cv)
    : cu_(cu), cv_(cv) {
  check_grids(cu, cv);
}

Field InvariantJacobian::operator()(int j, Argument arg, Channel c) const {
  if (j < 0 || j >= kInvariantCount) throw InvalidArgument("invariant index out of range");
  const Field& ref = cu_[Channel::value];
  Field out(ref.width(), ref.height(), ref.pad());
  const int k = static_cast<int>(c);
  Jet du, dv;
  for (int y = 0; y < ref.height(); ++y) {
    for (int x = 0; x < ref.width(); ++x) {
      invariant_partials(j, cu_.jet(x, y), cv_.jet(x, y), du, dv);
      out(x, y) = arg == Argument::first ? du[k] : dv[k];
    }
  }
  return out;
}

InvariantJacobian invariant_jacobian(const DerivativeChannels& cu, const DerivativeChannels& cv) {
  return InvariantJacobian(cu, cv);
}

}  // namespace lpde
