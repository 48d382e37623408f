#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lpde/objective.hpp"

namespace lpde {

struct TrainerConfig {
  double dt = 0.02;
  Regularization reg = Regularization::uniform(kDefaultRegularization, kDefaultRegularization);
  int max_iters = 200;
  /// Stop once a steepest-descent step lowers J by less than this fraction.
  double rel_tol = 1e-5;
  double grad_tol = 1e-6;
  /// Upper end of the line-search bracket, in units of the largest coefficient change.
  double bracket_max = 1.0;
  /// Golden-section termination width, relative to the current bracket.
  double golden_tol = 1e-3;
  int restart_period = 20;
  std::uint64_t seed = 0;
  /// Tikhonov term added to the diagonal of the initialization normal equations.
  double init_damping = 1e-8;
  /// Scale the search by a diagonal Gauss-Newton estimate 1 / (dt * sum_m mean(inv_j^2) + lambda_j).
  bool precondition = true;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  double elapsed_seconds = 0.0;
};

struct TrainingReport {
  std::vector<IterationRecord> iterations;
  CoefficientSchedule schedule;
  std::string termination;

  double final_objective() const { return iterations.back().objective; }
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Successive least-squares fit of a(t) to the residual velocity
/// d_m(t) = (O_m - u_m(t)) / (1 - t), with b fixed at zero.
CoefficientSchedule initialize(std::span<const TrainingPair> pairs, double dt,
                               double damping = 1e-8);

/// Golden-section minimization of f over [lo, hi] down to an interval of width tol.
/// Infinite probes (blow-up) pull the bracket towards lo. Returns the best probe,
/// or lo when no probe was finite.
double golden_search(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Initialization followed by Polak-Ribiere+ conjugate gradient with golden-section steps.
TrainingReport train(std::span<const TrainingPair> pairs, const TrainerConfig& config,
                     const IterationCallback& on_iteration = {});

}  // namespace lpde
