#pragma once

#include <array>

#include "lpde/fields.hpp"

namespace lpde {

/// Fundamental translation/rotation differential invariants of a field pair
/// up to second order. inv_j(u, v) lists u-terms before v-terms; the
/// companion ordering inv_j(v, u) is obtained by swapping the arguments.
///
///   0: 1                   6: tr H_v             12: grad_u' H_v grad_u
///   1: v                   7: tr H_u             13: grad_u' H_u grad_u
///   2: u                   8: grad_v' H_v grad_v 14: tr(H_v^2)
///   3: |grad v|^2          9: grad_v' H_u grad_v 15: tr(H_v H_u)
///   4: |grad u|^2         10: grad_v' H_v grad_u 16: tr(H_u^2)
///   5: grad_v . grad_u    11: grad_v' H_u grad_u
inline constexpr int kInvariantCount = 17;

using Coeffs = std::array<double, kInvariantCount>;
using InvariantValues = std::array<double, kInvariantCount>;

/// All invariants at one node, first argument plays the role of u.
InvariantValues invariants_at(const Jet& u, const Jet& v) noexcept;

/// sum_j w_j inv_j(u, v) at one node.
double weighted_invariant_sum(const Coeffs& w, const Jet& u, const Jet& v) noexcept;

/// Partial derivatives of inv_j(u, v) with respect to the channels of u and of v.
void invariant_partials(int j, const Jet& u, const Jet& v, Jet& d_u, Jet& d_v) noexcept;

/// sum_j w_j d inv_j(u, v) / d(channels), accumulated into d_u and d_v (overwritten).
void weighted_invariant_partials(const Coeffs& w, const Jet& u, const Jet& v, Jet& d_u,
                                 Jet& d_v) noexcept;

struct InvariantStack {
  std::array<Field, kInvariantCount> entries;

  const Field& operator[](int j) const { return entries[j]; }
};

/// Evaluates inv_j(u, v) on the interior for j = 0..16.
InvariantStack compute_invariants(const DerivativeChannels& cu, const DerivativeChannels& cv);

enum class Argument { first, second };

/// Pointwise partial derivatives of each invariant, materialized one field at a time.
class InvariantJacobian {
 public:
  InvariantJacobian(const DerivativeChannels& cu, const DerivativeChannels& cv);

  /// d inv_j(u, v) / d u_c (Argument::first) or d v_c (Argument::second).
  Field operator()(int j, Argument arg, Channel c) const;

 private:
  const DerivativeChannels& cu_;
  const DerivativeChannels& cv_;
};

InvariantJacobian invariant_jacobian(const DerivativeChannels& cu, const DerivativeChannels& cv);

}  // namespace lpde
