#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lpde/objective.hpp"

namespace lpde {

struct GradCheckOptions {
  double eps = 1e-5;
  int entries = 50;
  std::uint64_t seed = 0;
  double tolerance = 1e-3;
  /// Denominator floor of the relative error, so entries that are both ~0 compare as equal.
  double abs_floor = 1e-8;
};

struct GradCheckEntry {
  bool is_b = false;
  int step = 0;
  int index = 0;
  double adjoint = 0.0;
  double finite_difference = 0.0;
  double relative_error = 0.0;
};

struct GradCheckResult {
  std::vector<GradCheckEntry> entries;
  double worst_relative_error = 0.0;
  bool passed = false;
};

/// Compares adjoint gradient entries against central differences of the
/// discrete objective, (J(+eps) - J(-eps)) / (2 eps dt). Entries alternate
/// between a and b and are stratified over the time steps.
GradCheckResult check_gradient(std::span<const TrainingPair> pairs,
                               const CoefficientSchedule& sched, const Regularization& reg,
                               const GradCheckOptions& options,
                               const AdjointOptions& adjoint_options = {});

/// Entries drawn uniformly from [-scale, scale] with a seeded mt19937_64.
CoefficientSchedule random_schedule(double dt, double scale, std::uint64_t seed);

}  // namespace lpde
