#include "lpde/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lpde/error.hpp"

namespace lpde {
namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

CoefficientSchedule random_schedule(double dt, double scale, std::uint64_t seed) {
  CoefficientSchedule s = CoefficientSchedule::zeros(dt);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < s.steps(); ++i) {
    for (int j = 0; j < kInvariantCount; ++j) s.a[i][j] = scale * (2.0 * unit_uniform(rng) - 1.0);
    for (int j = 0; j < kInvariantCount; ++j) s.b[i][j] = scale * (2.0 * unit_uniform(rng) - 1.0);
  }
  return s;
}

GradCheckResult check_gradient(std::span<const TrainingPair> pairs,
                               const CoefficientSchedule& sched, const Regularization& reg,
                               const GradCheckOptions& options,
                               const AdjointOptions& adjoint_options) {
  if (options.entries < 1) throw InvalidArgument("gradcheck needs at least one entry");
  if (!(options.eps > 0.0)) throw InvalidArgument("gradcheck eps must be positive");
  const Evaluation base = evaluate(pairs, sched, reg);
  if (base.blew_up()) throw BlowUpError(-1);
  const GradientSchedule g = gradient(pairs, sched, reg, base.trajectories, adjoint_options);

  const int steps = sched.steps();
  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  result.entries.reserve(options.entries);
  for (int k = 0; k < options.entries; ++k) {
    GradCheckEntry e;
    e.is_b = (k % 2) == 1;
    // Stratify the step index so the sample spans the whole horizon.
    const int lo = static_cast<int>(static_cast<long long>(k) * steps / options.entries);
    const int hi = std::max(lo + 1, static_cast<int>(static_cast<long long>(k + 1) * steps /
                                                     options.entries));
    e.step = lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo));
    e.index = static_cast<int>(rng() % kInvariantCount);

    CoefficientSchedule plus = sched;
    CoefficientSchedule minus = sched;
    auto& p = e.is_b ? plus.b[e.step][e.index] : plus.a[e.step][e.index];
    auto& m = e.is_b ? minus.b[e.step][e.index] : minus.a[e.step][e.index];
    p += options.eps;
    m -= options.eps;
    const double jp = objective_value(pairs, plus, reg);
    const double jm = objective_value(pairs, minus, reg);
    if (std::isinf(jp) || std::isinf(jm)) throw BlowUpError(e.step);
    e.finite_difference = (jp - jm) / (2.0 * options.eps * sched.dt);
    e.adjoint = e.is_b ? g.grad_b[e.step][e.index] : g.grad_a[e.step][e.index];
    const double denom = std::max({std::abs(e.adjoint), std::abs(e.finite_difference),
                                   options.abs_floor});
    e.relative_error = std::abs(e.adjoint - e.finite_difference) / denom;
    result.worst_relative_error = std::max(result.worst_relative_error, e.relative_error);
    result.entries.push_back(e);
  }
  result.passed = result.worst_relative_error <= options.tolerance;
  return result;
}

}  // namespace lpde
