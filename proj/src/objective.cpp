#include "lpde/objective.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "lpde/error.hpp"
#include "lpde/parallel.hpp"

namespace lpde {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double tracking_term(const Field& output, const Field& target) {
  double sum = 0.0;
  for (int y = 0; y < output.height(); ++y) {
    for (int x = 0; x < output.width(); ++x) {
      const double r = output(x, y) - target(x, y);
      sum += r * r;
    }
  }
  return 0.5 * sum / static_cast<double>(output.interior_size());
}

// Per-pair adjoint contributions: sum over nodes of phi(i+1) inv_j(u_i, v_i), divided by N.
struct PairContribution {
  std::vector<Coeffs> a;
  std::vector<Coeffs> b;
};

PairContribution pair_contribution(const TrainingPair& pair, const CoefficientSchedule& sched,
                                   const Trajectory& traj, const AdjointOptions& options) {
  Field residual = pair.target;
  const Field& out = traj.output();
  for (int y = 0; y < residual.height(); ++y)
    for (int x = 0; x < residual.width(); ++x) residual(x, y) -= out(x, y);
  const AdjointTrajectory adj = solve_adjoint(traj, sched, residual, options);

  const int n = sched.steps();
  const double inv_n = 1.0 / static_cast<double>(residual.interior_size());
  PairContribution c{std::vector<Coeffs>(n, Coeffs{}), std::vector<Coeffs>(n, Coeffs{})};
  for (int i = 0; i < n; ++i) {
    const Field& u = traj.u[i];
    const Field& v = traj.v[i];
    const Field& phi = adj.phi[i + 1];
    const Field& psi = adj.psi[i + 1];
    Coeffs& sa = c.a[i];
    Coeffs& sb = c.b[i];
    for (int y = 0; y < u.height(); ++y) {
      for (int x = 0; x < u.width(); ++x) {
        const Jet ju = jet_at(u, x, y);
        const Jet jv = jet_at(v, x, y);
        const InvariantValues iu = invariants_at(ju, jv);
        const InvariantValues iv = invariants_at(jv, ju);
        const double p = phi(x, y);
        const double s = psi(x, y);
        for (int j = 0; j < kInvariantCount; ++j) {
          sa[j] += p * iu[j];
          sb[j] += s * iv[j];
        }
      }
    }
    for (int j = 0; j < kInvariantCount; ++j) {
      sa[j] *= inv_n;
      sb[j] *= inv_n;
    }
  }
  return c;
}

}  // namespace

Regularization Regularization::uniform(double lambda, double mu) {
  Regularization r;
  r.lambda.fill(lambda);
  r.mu.fill(mu);
  return r;
}

void Regularization::validate() const {
  for (int j = 0; j < kInvariantCount; ++j) {
    if (!(lambda[j] > 0.0) || !(mu[j] > 0.0) || !std::isfinite(lambda[j]) ||
        !std::isfinite(mu[j])) {
      throw InvalidArgument("regularization weights must be positive and finite");
    }
  }
}

double GradientSchedule::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < grad_a.size(); ++i) {
    for (int j = 0; j < kInvariantCount; ++j) {
      s += grad_a[i][j] * grad_a[i][j];
      s += grad_b[i][j] * grad_b[i][j];
    }
  }
  return std::sqrt(s);
}

bool Evaluation::blew_up() const { return std::isinf(value); }

void validate_pairs(std::span<const TrainingPair> pairs) {
  if (pairs.empty()) throw InvalidArgument("at least one training pair is required");
  const Field& ref = pairs.front().input;
  for (const auto& p : pairs) {
    if (!p.input.same_grid(ref) || !p.target.same_grid(ref)) {
      throw InvalidArgument("training pair '" + p.id + "' does not share the common grid");
    }
  }
}

double regularization_value(const CoefficientSchedule& sched, const Regularization& reg) {
  double total = 0.0;
  for (int j = 0; j < kInvariantCount; ++j) {
    double sa = 0.0;
    double sb = 0.0;
    for (int i = 0; i < sched.steps(); ++i) {
      sa += sched.a[i][j] * sched.a[i][j];
      sb += sched.b[i][j] * sched.b[i][j];
    }
    total += 0.5 * reg.lambda[j] * sched.dt * sa + 0.5 * reg.mu[j] * sched.dt * sb;
  }
  return total;
}

Evaluation evaluate(std::span<const TrainingPair> pairs, const CoefficientSchedule& sched,
                    const Regularization& reg) {
  validate_pairs(pairs);
  reg.validate();
  sched.validate();
  Evaluation e;
  e.regularization = regularization_value(sched, reg);
  std::vector<std::optional<Trajectory>> trajs(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), [&](int m) {
    try {
      trajs[m] = evolve(pairs[m].input, sched);
    } catch (const BlowUpError&) {
      trajs[m].reset();
    }
  });
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    if (!trajs[m]) {
      e.value = kInf;
      e.tracking = kInf;
      e.trajectories.clear();
      return e;
    }
    e.tracking += tracking_term(trajs[m]->output(), pairs[m].target);
    e.trajectories.push_back(std::move(*trajs[m]));
  }
  e.value = e.tracking + e.regularization;
  return e;
}

double objective_value(std::span<const TrainingPair> pairs, const CoefficientSchedule& sched,
                       const Regularization& reg) {
  validate_pairs(pairs);
  reg.validate();
  sched.validate();
  std::vector<double> terms(pairs.size(), kInf);
  parallel_for(static_cast<int>(pairs.size()), [&](int m) {
    try {
      terms[m] = tracking_term(evolve_output(pairs[m].input, sched), pairs[m].target);
    } catch (const BlowUpError&) {
      terms[m] = kInf;
    }
  });
  double total = 0.0;
  for (double t : terms) total += t;
  return total + regularization_value(sched, reg);
}

GradientSchedule gradient(std::span<const TrainingPair> pairs, const CoefficientSchedule& sched,
                          const Regularization& reg, std::span<const Trajectory> trajectories,
                          const AdjointOptions& options) {
  validate_pairs(pairs);
  reg.validate();
  sched.validate();
  if (trajectories.size() != pairs.size()) {
    throw InvalidArgument("gradient: one trajectory per training pair is required");
  }
  const int n = sched.steps();
  std::vector<PairContribution> parts(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), [&](int m) {
    parts[m] = pair_contribution(pairs[m], sched, trajectories[m], options);
  });

  GradientSchedule g;
  g.dt = sched.dt;
  g.grad_a.assign(n, Coeffs{});
  g.grad_b.assign(n, Coeffs{});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kInvariantCount; ++j) {
      double sa = 0.0;
      double sb = 0.0;
      for (const auto& part : parts) {
        sa += part.a[i][j];
        sb += part.b[i][j];
      }
      g.grad_a[i][j] = reg.lambda[j] * sched.a[i][j] - sa;
      g.grad_b[i][j] = reg.mu[j] * sched.b[i][j] - sb;
    }
  }
  return g;
}

}  // namespace lpde
