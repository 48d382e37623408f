#pragma once

#include <span>
#include <string>
#include <vector>

#include "lpde/adjoint_solver.hpp"
#include "lpde/forward_solver.hpp"

namespace lpde {

/// Input image I_m and expected output O_m on the same grid.
struct TrainingPair {
  Field input;
  Field target;
  std::string id;
};

/// Positive weights of the coefficient penalties.
struct Regularization {
  Coeffs lambda;
  Coeffs mu;

  static Regularization uniform(double lambda, double mu);
  void validate() const;
};

inline constexpr double kDefaultRegularization = 1e-4;

/// dJ/da_j and dJ/db_j per time step (the control derivative sampled at t = i*dt).
struct GradientSchedule {
  double dt = 0.0;
  std::vector<Coeffs> grad_a;
  std::vector<Coeffs> grad_b;

  int steps() const noexcept { return static_cast<int>(grad_a.size()); }
  double norm() const;
};

struct Evaluation {
  /// Total objective; +infinity when the forward evolution blew up.
  double value = 0.0;
  double tracking = 0.0;
  double regularization = 0.0;
  std::vector<Trajectory> trajectories;

  bool blew_up() const;
};

/// Throws InvalidArgument unless the pair list is non-empty and shares one grid.
void validate_pairs(std::span<const TrainingPair> pairs);

/// 1/2 sum_j lambda_j dt sum_i a_ij^2 + the same for mu, b.
double regularization_value(const CoefficientSchedule& sched, const Regularization& reg);

/// J = 1/2 sum_m mean((u_m(1) - O_m)^2) + regularization, keeping trajectories.
Evaluation evaluate(std::span<const TrainingPair> pairs, const CoefficientSchedule& sched,
                    const Regularization& reg);

/// J without storing trajectories (line-search probes). +infinity on blow-up.
double objective_value(std::span<const TrainingPair> pairs, const CoefficientSchedule& sched,
                       const Regularization& reg);

/// Adjoint-based gradient. `trajectories` must come from evaluate() on the same schedule.
GradientSchedule gradient(std::span<const TrainingPair> pairs, const CoefficientSchedule& sched,
                          const Regularization& reg, std::span<const Trajectory> trajectories,
                          const AdjointOptions& options = {});

}  // namespace lpde
