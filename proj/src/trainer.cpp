#include "lpde/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "lpde/error.hpp"

namespace lpde {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

struct Probe {
  double alpha;
  double value;
};

Probe golden_probe(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double a = lo;
  double b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = f(c);
  double fd = f(d);
  Probe best{lo, kInf};
  auto consider = [&best](double x, double fx) {
    if (fx < best.value) best = {x, fx};
  };
  consider(c, fc);
  consider(d, fd);
  while (b - a > tol) {
    if (fc <= fd || (std::isinf(fc) && std::isinf(fd))) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best;
}

int parameter_count(const CoefficientSchedule& s) { return 2 * kInvariantCount * s.steps(); }

Eigen::VectorXd flatten(const CoefficientSchedule& s) {
  Eigen::VectorXd x(parameter_count(s));
  const int half = kInvariantCount * s.steps();
  for (int i = 0; i < s.steps(); ++i) {
    for (int j = 0; j < kInvariantCount; ++j) {
      x[i * kInvariantCount + j] = s.a[i][j];
      x[half + i * kInvariantCount + j] = s.b[i][j];
    }
  }
  return x;
}

Eigen::VectorXd flatten(const GradientSchedule& g) {
  Eigen::VectorXd x(2 * kInvariantCount * g.steps());
  const int half = kInvariantCount * g.steps();
  for (int i = 0; i < g.steps(); ++i) {
    for (int j = 0; j < kInvariantCount; ++j) {
      x[i * kInvariantCount + j] = g.grad_a[i][j];
      x[half + i * kInvariantCount + j] = g.grad_b[i][j];
    }
  }
  return x;
}

CoefficientSchedule unflatten(const Eigen::VectorXd& x, double dt) {
  CoefficientSchedule s = CoefficientSchedule::zeros(dt);
  const int half = kInvariantCount * s.steps();
  for (int i = 0; i < s.steps(); ++i) {
    for (int j = 0; j < kInvariantCount; ++j) {
      s.a[i][j] = x[i * kInvariantCount + j];
      s.b[i][j] = x[half + i * kInvariantCount + j];
    }
  }
  return s;
}

// Diagonal of a Gauss-Newton model in per-step units: one step of a_ij moves
// u(1) by about dt * inv_j(u_i, v_i).
Eigen::VectorXd diagonal_preconditioner(std::span<const TrainingPair> pairs,
                                        std::span<const Trajectory> trajs,
                                        const TrainerConfig& config) {
  const int steps = trajs.front().steps();
  const int half = kInvariantCount * steps;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2 * half);
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    for (int i = 0; i < steps; ++i) {
      const Field& u = trajs[m].u[i];
      const Field& v = trajs[m].v[i];
      const double inv_n = 1.0 / static_cast<double>(u.interior_size());
      for (int y = 0; y < u.height(); ++y) {
        for (int x = 0; x < u.width(); ++x) {
          const Jet ju = jet_at(u, x, y);
          const Jet jv = jet_at(v, x, y);
          const InvariantValues iu = invariants_at(ju, jv);
          const InvariantValues iv = invariants_at(jv, ju);
          for (int j = 0; j < kInvariantCount; ++j) {
            p[i * kInvariantCount + j] += iu[j] * iu[j] * inv_n;
            p[half + i * kInvariantCount + j] += iv[j] * iv[j] * inv_n;
          }
        }
      }
    }
  }
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j < kInvariantCount; ++j) {
      double& pa = p[i * kInvariantCount + j];
      double& pb = p[half + i * kInvariantCount + j];
      pa = 1.0 / (config.dt * pa + config.reg.lambda[j]);
      pb = 1.0 / (config.dt * pb + config.reg.mu[j]);
    }
  }
  return p;
}

}  // namespace

void TrainerConfig::validate() const {
  step_count(dt);
  reg.validate();
  if (max_iters < 1) throw InvalidArgument("max_iters must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidArgument("rel_tol must lie in (0, 1)");
  if (!(golden_tol > 0.0 && golden_tol < 1.0)) {
    throw InvalidArgument("golden_tol must lie in (0, 1)");
  }
  if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
  if (!(bracket_max > 0.0)) throw InvalidArgument("bracket_max must be positive");
  if (restart_period < 1) throw InvalidArgument("restart_period must be at least 1");
  if (!(init_damping > 0.0)) throw InvalidArgument("init_damping must be positive");
}

CoefficientSchedule initialize(std::span<const TrainingPair> pairs, double dt, double damping) {
  validate_pairs(pairs);
  CoefficientSchedule sched = CoefficientSchedule::zeros(dt);
  std::vector<FieldPair> states;
  states.reserve(pairs.size());
  for (const auto& p : pairs) {
    FieldPair s{p.input, p.input};
    s.u.zero_halo();
    s.v.zero_halo();
    states.push_back(std::move(s));
  }
  const Coeffs zero{};
  for (int i = 0; i < sched.steps(); ++i) {
    const double remaining = 1.0 - i * dt;
    Eigen::Matrix<double, kInvariantCount, kInvariantCount> normal =
        Eigen::Matrix<double, kInvariantCount, kInvariantCount>::Zero();
    Eigen::Matrix<double, kInvariantCount, 1> rhs = Eigen::Matrix<double, kInvariantCount, 1>::Zero();
    for (std::size_t m = 0; m < pairs.size(); ++m) {
      const Field& u = states[m].u;
      const Field& v = states[m].v;
      const Field& target = pairs[m].target;
      Eigen::Matrix<double, kInvariantCount, kInvariantCount> gm =
          Eigen::Matrix<double, kInvariantCount, kInvariantCount>::Zero();
      Eigen::Matrix<double, kInvariantCount, 1> rm = Eigen::Matrix<double, kInvariantCount, 1>::Zero();
      for (int y = 0; y < u.height(); ++y) {
        for (int x = 0; x < u.width(); ++x) {
          const InvariantValues inv = invariants_at(jet_at(u, x, y), jet_at(v, x, y));
          const double d = (target(x, y) - u(x, y)) / remaining;
          for (int j = 0; j < kInvariantCount; ++j) {
            rm[j] += inv[j] * d;
            for (int k = j; k < kInvariantCount; ++k) gm(j, k) += inv[j] * inv[k];
          }
        }
      }
      const double inv_n = 1.0 / static_cast<double>(u.interior_size());
      normal += gm * inv_n;
      rhs += rm * inv_n;
    }
    for (int j = 0; j < kInvariantCount; ++j) {
      for (int k = 0; k < j; ++k) normal(j, k) = normal(k, j);
      normal(j, j) += damping;
    }
    Eigen::LLT<Eigen::Matrix<double, kInvariantCount, kInvariantCount>> llt(normal);
    const Eigen::Matrix<double, kInvariantCount, 1> sol = llt.solve(rhs);
    if (llt.info() != Eigen::Success || !sol.allFinite()) {
      throw NumericalError("initialization: singular normal equations at step " +
                           std::to_string(i));
    }
    for (int j = 0; j < kInvariantCount; ++j) sched.a[i][j] = sol[j];
    for (auto& s : states) s = step(s.u, s.v, sched.a[i], zero, dt, i);
  }
  return sched;
}

double golden_search(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw InvalidArgument("golden_search: empty bracket");
  if (!(tol > 0.0)) throw InvalidArgument("golden_search: tolerance must be positive");
  return golden_probe(f, lo, hi, tol).alpha;
}

TrainingReport train(std::span<const TrainingPair> pairs, const TrainerConfig& config,
                     const IterationCallback& on_iteration) {
  config.validate();
  validate_pairs(pairs);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  TrainingReport report;
  // A heuristic start that diverges (during the fit, the re-evolution or the
  // adjoint sweep) is replaced by the zero schedule.
  CoefficientSchedule sched;
  Evaluation eval;
  Eigen::VectorXd g;
  try {
    sched = initialize(pairs, config.dt, config.init_damping);
    eval = evaluate(pairs, sched, config.reg);
    if (eval.blew_up()) throw BlowUpError(0);
    g = flatten(gradient(pairs, sched, config.reg, eval.trajectories));
  } catch (const BlowUpError&) {
    sched = CoefficientSchedule::zeros(config.dt);
    eval = evaluate(pairs, sched, config.reg);
    g = flatten(gradient(pairs, sched, config.reg, eval.trajectories));
  }
  double objective = eval.value;
  Eigen::VectorXd x = flatten(sched);
  const Eigen::VectorXd precond = config.precondition
                                      ? diagonal_preconditioner(pairs, eval.trajectories, config)
                                      : Eigen::VectorXd::Ones(x.size());
  eval.trajectories.clear();

  auto record = [&](int iter, double step) {
    IterationRecord r{iter, objective, g.norm(), step, elapsed()};
    report.iterations.push_back(r);
    if (on_iteration) on_iteration(r);
  };
  record(0, 0.0);

  auto finish = [&](std::string reason) {
    report.schedule = unflatten(x, config.dt);
    report.termination = std::move(reason);
    return report;
  };

  if (g.norm() < config.grad_tol) return finish("gradient norm below tolerance");

  Eigen::VectorXd direction = -precond.cwiseProduct(g);
  bool steepest = true;
  int since_restart = 0;
  double bracket = config.bracket_max;

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const double scale = direction.cwiseAbs().maxCoeff();
    const Eigen::VectorXd unit = direction / scale;
    auto line = [&](double alpha) {
      return objective_value(pairs, unflatten(x + alpha * unit, config.dt), config.reg);
    };

    Probe best = golden_probe(line, 0.0, bracket, config.golden_tol * bracket);
    for (int shrink = 0; !(best.value < objective) && shrink < 12; ++shrink) {
      bracket *= 0.1;
      best = golden_probe(line, 0.0, bracket, config.golden_tol * bracket);
    }
    if (!(best.value < objective)) {
      if (!steepest) {
        direction = -precond.cwiseProduct(g);
        steepest = true;
        since_restart = 0;
        bracket = config.bracket_max;
        --iter;
        continue;
      }
      return finish("line search found no decrease");
    }

    x += best.alpha * unit;
    const double previous = objective;
    sched = unflatten(x, config.dt);
    eval = evaluate(pairs, sched, config.reg);
    objective = eval.value;
    Eigen::VectorXd g_new;
    try {
      g_new = flatten(gradient(pairs, sched, config.reg, eval.trajectories));
    } catch (const BlowUpError&) {
      g = Eigen::VectorXd::Zero(x.size());
      record(iter, best.alpha);
      return finish("adjoint blow-up");
    }
    eval.trajectories.clear();
    bracket = std::min(config.bracket_max, 4.0 * best.alpha);

    const Eigen::VectorXd g_old = g;
    g = g_new;
    record(iter, best.alpha);

    if (g.norm() < config.grad_tol) return finish("gradient norm below tolerance");
    const double decrease = previous > 0.0 ? (previous - objective) / previous : 0.0;
    bool restart = ++since_restart >= config.restart_period;
    if (decrease < config.rel_tol) {
      if (steepest) return finish("relative decrease below tolerance");
      restart = true;
    }
    if (restart) {
      direction = -precond.cwiseProduct(g);
      steepest = true;
      since_restart = 0;
      continue;
    }
    const Eigen::VectorXd pg = precond.cwiseProduct(g);
    const double beta = std::max(0.0, pg.dot(g - g_old) / precond.cwiseProduct(g_old).dot(g_old));
    direction = -pg + beta * direction;
    steepest = beta == 0.0;
    if (direction.dot(g) >= 0.0) {
      direction = -pg;
      steepest = true;
      since_restart = 0;
    }
  }
  return finish("maximum iterations reached");
}

}  // namespace lpde
