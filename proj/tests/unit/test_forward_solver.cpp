#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpde/error.hpp"
#include "lpde/forward_solver.hpp"
#include "lpde/gradcheck.hpp"
#include "test_support.hpp"

using namespace lpde;
using lpde::testing::make_field;
using lpde::testing::max_abs_diff;
using lpde::testing::smooth_random_field;

namespace {

Coeffs unit(int j, double value = 1.0) {
  Coeffs c{};
  c[j] = value;
  return c;
}

CoefficientSchedule constant_schedule(double dt, const Coeffs& a, const Coeffs& b = {}) {
  CoefficientSchedule s = CoefficientSchedule::zeros(dt);
  for (auto& row : s.a) row = a;
  for (auto& row : s.b) row = b;
  return s;
}

// Standalone explicit heat stepper on a plain array with a one-node zero frame.
std::vector<double> heat_oracle(const Field& image, double coef, double dt, int steps) {
  const int w = image.width(), h = image.height(), s = w + 2;
  std::vector<double> cur((w + 2) * (h + 2), 0.0), nxt(cur.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) cur[(y + 1) * s + x + 1] = image(x, y);
  for (int k = 0; k < steps; ++k) {
    for (int y = 1; y <= h; ++y) {
      for (int x = 1; x <= w; ++x) {
        const int i = y * s + x;
        const double lap = (cur[i - 1] - 2.0 * cur[i] + cur[i + 1]) + (cur[i - s] - 2.0 * cur[i] + cur[i + s]);
        nxt[i] = cur[i] + dt * (coef * lap);
      }
    }
    std::swap(cur, nxt);
  }
  return cur;
}

}  // namespace

TEST_CASE("rhs examples") {
  const Field u = smooth_random_field(8, 8, 1);
  const Field v = smooth_random_field(8, 8, 2);
  FieldPair r = rhs(u, v, Coeffs{}, Coeffs{});
  CHECK(r.u.max_abs() == 0.0);
  CHECK(r.v.max_abs() == 0.0);

  r = rhs(u, v, unit(0), Coeffs{});
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(r.u(x, y) == 1.0);
  CHECK(r.u(-1, 3) == 0.0);
  CHECK(r.v.max_abs() == 0.0);

  const Field q = make_field(8, 8, [](int x, int y) { return double(x * x + y * y); });
  r = rhs(q, q, unit(7), Coeffs{});
  for (int y = 1; y < 7; ++y)
    for (int x = 1; x < 7; ++x) CHECK(r.u(x, y) == 4.0);
}

TEST_CASE("rhs of v uses the swapped argument order") {
  const Field u = smooth_random_field(8, 8, 3);
  const Field v = smooth_random_field(8, 8, 4);
  // b_2 multiplies inv_2(v, u) = v.
  const FieldPair r = rhs(u, v, Coeffs{}, unit(2));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) CHECK(r.v(x, y) == v(x, y));
}

TEST_CASE("step examples") {
  const Field u = smooth_random_field(6, 6, 5);
  FieldPair s = step(u, u, Coeffs{}, Coeffs{}, 0.1);
  CHECK(max_abs_diff(s.u, u) == 0.0);
  CHECK(max_abs_diff(s.v, u) == 0.0);

  const Field zero(6, 6);
  s = step(zero, zero, unit(0), Coeffs{}, 0.1);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) CHECK(s.u(x, y) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.u(-2, -2) == 0.0);

  CHECK_THROWS_AS(step(zero, zero, unit(0, 1000.0), Coeffs{}, 0.02, 7), BlowUpError);
  try {
    step(zero, zero, unit(0, 1000.0), Coeffs{}, 0.02, 7);
  } catch (const BlowUpError& e) {
    CHECK(e.time_index() == 8);
  }
}

TEST_CASE("evolve examples") {
  const Field image = smooth_random_field(10, 10, 6);
  const Trajectory still = evolve(image, CoefficientSchedule::zeros(0.02));
  CHECK(still.steps() == 50);
  CHECK(max_abs_diff(still.output(), image) == 0.0);
  CHECK(max_abs_diff(still.u[0], image) == 0.0);
  CHECK(max_abs_diff(still.v[0], image) == 0.0);

  // dt = 0.5 and dyadic intensities keep every addition exact.
  const Field dyadic = make_field(6, 6, [](int x, int y) { return (x + 8 * y) / 64.0; });
  const Trajectory lifted = evolve(dyadic, constant_schedule(0.5, unit(0)));
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) CHECK(lifted.output()(x, y) == dyadic(x, y) + 1.0);

  CHECK_THROWS_AS(evolve(image, constant_schedule(0.02, unit(0, 1e4))), BlowUpError);
}

TEST_CASE("heat coefficient matches a standalone diffusion stepper") {
  const Field image = smooth_random_field(14, 12, 7);
  const Field out = evolve_output(image, constant_schedule(0.01, unit(7, 0.5)));
  const std::vector<double> oracle = heat_oracle(image, 0.5, 0.01, 100);
  double worst = 0.0;
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 14; ++x) worst = std::max(worst, std::abs(out(x, y) - oracle[(y + 1) * 16 + x + 1]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("translation equivariance away from the boundary band") {
  const int n = 40;
  const Field image = make_field(n, n, [](int x, int y) {
    if (x < 12 || x >= 28 || y < 12 || y >= 28) return 0.0;
    return 0.5 + 0.3 * std::sin(0.7 * x) * std::cos(0.4 * y);
  });
  const CoefficientSchedule sched = random_schedule(0.1, 0.2, 17);
  const int steps = sched.steps();
  for (auto [sx, sy] : {std::pair{2, -3}, std::pair{-1, 1}}) {
    const Field a = evolve_output(shift(image, sx, sy), sched);
    const Field b = shift(evolve_output(image, sched), sx, sy);
    const int band = steps + 1 + std::max(std::abs(sx), std::abs(sy));
    for (int y = band; y < n - band; ++y)
      for (int x = band; x < n - band; ++x) CHECK(a(x, y) == b(x, y));
  }
}

TEST_CASE("quarter-turn rotation equivariance") {
  const Field image = smooth_random_field(16, 16, 8);
  const CoefficientSchedule sched = random_schedule(0.05, 0.2, 3);
  const Field a = evolve_output(rotate90(image), sched);
  const Field b = rotate90(evolve_output(image, sched));
  CHECK(max_abs_diff(a, b) <= 1e-12);
}

TEST_CASE("evolution is deterministic") {
  const Field image = smooth_random_field(12, 12, 9);
  const CoefficientSchedule sched = random_schedule(0.05, 0.2, 4);
  const Trajectory a = evolve(image, sched);
  const Trajectory b = evolve(image, sched);
  for (int i = 0; i <= a.steps(); ++i) {
    CHECK(std::equal(a.u[i].values().begin(), a.u[i].values().end(), b.u[i].values().begin()));
    CHECK(std::equal(a.v[i].values().begin(), a.v[i].values().end(), b.v[i].values().begin()));
  }
}

TEST_CASE("forward Euler converges at first order") {
  const Field image = smooth_random_field(16, 16, 10);
  auto schedule = [](double dt) {
    CoefficientSchedule s = CoefficientSchedule::zeros(dt);
    for (int i = 0; i < s.steps(); ++i) {
      const double t = i * dt;
      s.a[i][7] = 0.3 + 0.2 * std::sin(2.0 * M_PI * t);
      s.a[i][2] = -0.5 * std::cos(M_PI * t);
      s.a[i][4] = 0.5;
      s.a[i][1] = 0.2;
      s.b[i][7] = 0.4;
      s.b[i][5] = 0.3 * t;
      s.b[i][2] = -0.2;
    }
    return s;
  };
  const Field reference = evolve_output(image, schedule(1e-4));
  std::vector<double> log_dt, log_err;
  for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
    log_dt.push_back(std::log(dt));
    log_err.push_back(std::log(max_abs_diff(evolve_output(image, schedule(dt)), reference)));
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < log_dt.size(); ++k) {
    mx += log_dt[k];
    my += log_err[k];
  }
  mx /= log_dt.size();
  my /= log_dt.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < log_dt.size(); ++k) {
    sxy += (log_dt[k] - mx) * (log_err[k] - my);
    sxx += (log_dt[k] - mx) * (log_dt[k] - mx);
  }
  const double slope = sxy / sxx;
  CHECK(slope == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("schedule validation") {
  CoefficientSchedule s = CoefficientSchedule::zeros(0.1);
  CHECK(s.steps() == 10);
  s.a.pop_back();
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = CoefficientSchedule::zeros(0.1);
  s.b[3][4] = std::nan("");
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  CHECK_THROWS_AS(CoefficientSchedule::zeros(-0.1), InvalidArgument);
}
