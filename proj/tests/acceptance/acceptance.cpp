// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Learning runs work on double-precision images in memory, so 8-bit
// quantization does not enter the PSNR/RMS figures.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lpde/dataset_io.hpp"
#include "lpde/gradcheck.hpp"
#include "lpde/invariants.hpp"
#include "lpde/metrics.hpp"
#include "lpde/trainer.hpp"
#include "test_support.hpp"

using namespace lpde;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

int failures = 0;

void report(const char* name, double budget_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = budget_seconds <= 0.0 || secs <= budget_seconds;
  if (!in_time) o.detail += format(" (over the %.0f s budget)", budget_seconds);
  const bool pass = o.pass && in_time;
  failures += !pass;
  std::printf("%s %s  %s  [%.1f s]\n", name, pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
}

// ---- AC-1 -------------------------------------------------------------------

// Invariants written with gradient vectors and Hessian matrices.
std::array<double, kInvariantCount> matrix_invariants(const Jet& u, const Jet& v) {
  const double gu[2] = {u[1], u[2]}, gv[2] = {v[1], v[2]};
  const double hu[2][2] = {{u[3], u[4]}, {u[4], u[5]}}, hv[2][2] = {{v[3], v[4]}, {v[4], v[5]}};
  auto quad = [](const double a[2], const double h[2][2], const double b[2]) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) s += a[i] * h[i][k] * b[k];
    return s;
  };
  auto trace_prod = [](const double a[2][2], const double b[2][2]) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k) s += a[i][k] * b[k][i];
    return s;
  };
  const double id[2][2] = {{1, 0}, {0, 1}};
  return {1.0,
          v[0],
          u[0],
          gv[0] * gv[0] + gv[1] * gv[1],
          gu[0] * gu[0] + gu[1] * gu[1],
          gv[0] * gu[0] + gv[1] * gu[1],
          trace_prod(hv, id),
          trace_prod(hu, id),
          quad(gv, hv, gv),
          quad(gv, hu, gv),
          quad(gv, hv, gu),
          quad(gv, hu, gu),
          quad(gu, hv, gu),
          quad(gu, hu, gu),
          trace_prod(hv, hv),
          trace_prod(hv, hu),
          trace_prod(hu, hu)};
}

Outcome ac1() {
  using lpde::testing::make_field;
  struct Case {
    const char* name;
    std::function<double(int, int)> u, v;
    Jet ju, jv;
  };
  // Coordinates are shifted by the evaluation point inside the jets below.
  const int n = 12;
  std::vector<Case> cases = {
      {"constant", [](int, int) { return 0.25; }, [](int, int) { return 0.75; }, {}, {}},
      {"ramp", [](int x, int y) { return 2.0 * x - 3.0 * y + 1.0; }, [](int x, int y) { return -x + 0.5 * y; }, {}, {}},
      {"quadratic", [](int x, int y) { return double(x * x + x * y + 2 * y * y); },
       [](int x, int y) { return double(3 * x * x - 2 * x * y - y * y + x); }, {}, {}},
  };
  int mismatches = 0;
  for (const auto& c : cases) {
    const Field u = make_field(n, n, c.u), v = make_field(n, n, c.v);
    const InvariantStack s = compute_invariants(derivatives(u), derivatives(v));
    for (int y = 1; y < n - 1; ++y)
      for (int x = 1; x < n - 1; ++x) {
        Jet ju{}, jv{};
        const std::string name = c.name;
        if (name == "constant") {
          ju = {0.25, 0, 0, 0, 0, 0};
          jv = {0.75, 0, 0, 0, 0, 0};
        } else if (name == "ramp") {
          ju = {c.u(x, y), 2, -3, 0, 0, 0};
          jv = {c.v(x, y), -1, 0.5, 0, 0, 0};
        } else {
          ju = {c.u(x, y), 2.0 * x + y, x + 4.0 * y, 2, 1, 4};
          jv = {c.v(x, y), 6.0 * x - 2.0 * y + 1, -2.0 * x - 2.0 * y, 6, -2, -2};
        }
        const auto expected = matrix_invariants(ju, jv);
        for (int j = 0; j < kInvariantCount; ++j) mismatches += s[j](x, y) != expected[j];
      }
  }

  // Swapping u and v permutes the invariants.
  const int partner[kInvariantCount] = {0, 2, 1, 4, 3, 5, 7, 6, 13, 12, 11, 10, 9, 8, 16, 15, 14};
  const Field u = lpde::testing::smooth_random_field(20, 20, 1);
  const Field v = lpde::testing::smooth_random_field(20, 20, 2);
  const DerivativeChannels cu = derivatives(u), cv = derivatives(v);
  const InvariantStack uv = compute_invariants(cu, cv), vu = compute_invariants(cv, cu);
  double swap_err = 0.0;
  for (int j = 0; j < kInvariantCount; ++j) swap_err = std::max(swap_err, lpde::testing::max_abs_diff(uv[j], vu[partner[j]]));

  const InvariantStack rot = compute_invariants(derivatives(rotate90(u)), derivatives(rotate90(v)));
  double rot_err = 0.0;
  for (int j = 0; j < kInvariantCount; ++j) rot_err = std::max(rot_err, lpde::testing::max_abs_diff(rot[j], rotate90(uv[j])));

  return {mismatches == 0 && swap_err <= 1e-12 && rot_err <= 1e-12,
          format("analytic mismatches %d, swap err %.1e, rotation err %.1e", mismatches, swap_err, rot_err)};
}

// ---- AC-2 -------------------------------------------------------------------

Outcome ac2() {
  std::vector<TrainingPair> pairs;
  for (int m = 0; m < 2; ++m)
    pairs.push_back({lpde::testing::smooth_random_field(16, 16, 10 + 2 * m),
                     lpde::testing::smooth_random_field(16, 16, 11 + 2 * m), std::to_string(m)});
  const CoefficientSchedule sched = random_schedule(0.01, 0.2, 5);
  GradCheckOptions opt;
  opt.entries = 2 * sched.steps();
  const GradCheckResult r = check_gradient(pairs, sched, Regularization::uniform(1e-4, 1e-4), opt);
  std::vector<int> a_seen(sched.steps(), 0), b_seen(sched.steps(), 0);
  for (const auto& e : r.entries) (e.is_b ? b_seen : a_seen)[e.step] = 1;
  int covered = 0;
  for (int i = 0; i < sched.steps(); ++i) covered += a_seen[i] && b_seen[i];
  return {r.passed && r.worst_relative_error <= 1e-3 && covered == sched.steps(),
          format("%zu entries, steps covered in a and b %d/%d, worst relative error %.2e", r.entries.size(),
                 covered, sched.steps(), r.worst_relative_error)};
}

// ---- AC-3 .. AC-6 -----------------------------------------------------------

struct Task {
  std::vector<TrainingPair> train, heldout;
};

// Sources are textures with seeds 100, 101, ...; the last two are held out.
Task make_task(int size, int count, const std::function<std::pair<Image, Image>(const Image&, int)>& oracle) {
  Task t;
  for (int k = 0; k < count + 2; ++k) {
    const auto [in, out] = oracle(make_texture(size, size, 100 + k), k);
    TrainingPair p{pad(in), pad(out), std::to_string(k)};
    (k < count ? t.train : t.heldout).push_back(std::move(p));
  }
  return t;
}

std::vector<TrainingReport> learning_runs;

TrainingReport run(const Task& t) {
  const TrainingReport r = train(t.train, TrainerConfig{});
  learning_runs.push_back(r);
  return r;
}

double rms(const Field& a, const Field& b) {
  double s = 0.0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) s += (a(x, y) - b(x, y)) * (a(x, y) - b(x, y));
  return std::sqrt(s / a.interior_size());
}

Outcome ac3() {
  const Task t = make_task(32, 3, [](const Image& s, int) {
    return std::pair{s, diffuse(s, 0.5, 1.0, 0.02)};
  });
  const TrainingReport r = run(t);
  double worst = 0.0;
  for (const auto& p : t.heldout) worst = std::max(worst, rms(evolve_output(p.input, r.schedule), p.target));
  return {worst <= 1e-3, format("held-out RMS %.2e after %zu iterations (%s)", worst, r.iterations.size() - 1,
                                r.termination.c_str())};
}

CoefficientSchedule blur_schedule;

Outcome ac4() {
  const Task t = make_task(64, 5, [](const Image& s, int) { return std::pair{s, gaussian_blur(s, 1.0)}; });
  const TrainingReport r = run(t);
  blur_schedule = r.schedule;
  double worst = INFINITY;
  for (const auto& p : t.heldout) worst = std::min(worst, psnr(evolve_output(p.input, r.schedule), p.target));
  return {worst >= 35.0, format("held-out PSNR >= %.2f dB after %zu iterations (%s)", worst,
                                r.iterations.size() - 1, r.termination.c_str())};
}

Outcome improvement(const Task& t, const TrainingReport& r) {
  double worst_gain = INFINITY;
  std::string detail;
  for (const auto& p : t.heldout) {
    const double out = psnr(evolve_output(p.input, r.schedule), p.target);
    const double in = psnr(p.input, p.target);
    worst_gain = std::min(worst_gain, out - in);
    detail += format("%.2f dB vs input %.2f dB; ", out, in);
  }
  detail += format("%zu iterations (%s)", r.iterations.size() - 1, r.termination.c_str());
  return {worst_gain >= 2.0, detail};
}

Outcome ac5() {
  const Task t = make_task(64, 5, [](const Image& s, int) { return std::pair{gaussian_blur(s, 1.0), s}; });
  return improvement(t, run(t));
}

Outcome ac6() {
  const Task t = make_task(64, 5, [](const Image& s, int k) {
    return std::pair{add_noise(s, 15.0 / 255.0, 7 + static_cast<std::uint64_t>(k)), s};
  });
  return improvement(t, run(t));
}

// ---- AC-7 -------------------------------------------------------------------

Outcome equivariance(const CoefficientSchedule& sched, const char* label) {
  const int n = 128;
  const Image tex = make_texture(48, 48, 7);
  const Field image = lpde::testing::make_field(n, n, [&](int x, int y) {
    const int tx = x - 40, ty = y - 40;
    return (tx >= 0 && tx < 48 && ty >= 0 && ty < 48) ? tex.at(tx, ty) : 0.0;
  });
  const Field base = evolve_output(image, sched);
  long mismatches = 0;
  for (auto [sx, sy] : {std::pair{3, -2}, std::pair{-5, 4}}) {
    const Field a = evolve_output(shift(image, sx, sy), sched);
    const Field b = shift(base, sx, sy);
    const int band = sched.steps() + 1 + std::max(std::abs(sx), std::abs(sy));
    for (int y = band; y < n - band; ++y)
      for (int x = band; x < n - band; ++x) mismatches += a(x, y) != b(x, y);
  }
  const Field sq = pad(make_texture(40, 40, 8));
  const double rot = lpde::testing::max_abs_diff(evolve_output(rotate90(sq), sched), rotate90(evolve_output(sq, sched)));
  return {mismatches == 0 && rot <= 1e-12,
          format("%s: translation mismatches %ld, rotation err %.1e", label, mismatches, rot)};
}

Outcome ac7() {
  Outcome r = equivariance(random_schedule(0.02, 0.1, 11), "random");
  if (blur_schedule.steps() > 0) {
    const Outcome t = equivariance(blur_schedule, "trained blur");
    r = {r.pass && t.pass, r.detail + "; " + t.detail};
  }
  return r;
}

// ---- AC-8 -------------------------------------------------------------------

Outcome ac8() {
  if (learning_runs.size() != 4) return {false, format("expected 4 learning runs, have %zu", learning_runs.size())};
  const double grad_tol = TrainerConfig{}.grad_tol;
  int bad_monotone = 0, bad_first = 0;
  for (const auto& r : learning_runs) {
    for (std::size_t k = 1; k < r.iterations.size(); ++k)
      bad_monotone += r.iterations[k].objective > r.iterations[k - 1].objective;
    if (r.iterations[0].grad_norm > grad_tol &&
        !(r.iterations.size() > 1 && r.iterations[1].objective < r.iterations[0].objective))
      ++bad_first;
  }
  return {bad_monotone == 0 && bad_first == 0,
          format("ascents %d, runs without first-step descent %d", bad_monotone, bad_first)};
}

// ---- AC-9 -------------------------------------------------------------------

Outcome ac9() {
  const Field truth = lpde::testing::make_field(10, 10, [](int x, int y) { return 0.05 * x + 0.03 * y + 0.2; });
  const auto plus = [&](double c) {
    return lpde::testing::make_field(10, 10, [&](int x, int y) { return truth(x, y) + c; });
  };
  const double p20 = psnr(plus(0.1), truth), p40 = psnr(plus(0.01), truth);
  auto mask = [](const std::function<bool(int, int)>& fn) {
    BinaryMask m{8, 8, std::vector<std::uint8_t>(64)};
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) m.bits[y * 8 + x] = fn(x, y);
    return m;
  };
  const BinaryMask a = mask([](int x, int y) { return x < 4 && y < 4; });
  const double f1 = f_measure(a, a);
  const double f06 = f_measure(a, mask([](int x, int y) { return x < 2 && y < 4; }));
  const double f0 = f_measure(a, mask([](int x, int y) { return x >= 4 && y >= 4; }));
  const bool ok = std::abs(p20 - 20.0) <= 1e-9 && std::abs(p40 - 40.0) <= 1e-9 && f1 == 1.0 && f06 == 0.6 && f0 == 0.0;
  return {ok, format("PSNR %.12f / %.12f dB, F2 %.17g / %.17g / %.17g", p20, p40, f1, f06, f0)};
}

// ---- AC-10 ------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" LPDE_CLI_PATH "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac10() {
  const fs::path root = fs::temp_directory_path() / "lpde_acceptance";
  fs::remove_all(root);
  std::vector<std::string> problems;
  for (const char* run : {"r1", "r2"}) {
    const fs::path d = root / run;
    fs::create_directories(d);
    const char* steps[] = {
        "synth --task blur --generate 2 --size 16 --out blur",
        "synth --task noise --generate 2 --size 16 --seed 3 --ext .png --out noise",
        "train --manifest blur/manifest.json --out s.json --dt 0.05 --max-iters 5 --log train.log",
        "apply --coeffs s.json --input blur/input_000.pgm --output out.pgm",
        "invariants --input blur/input_001.pgm --out inv",
    };
    for (const char* s : steps)
      if (cli(d, s) != 0) problems.push_back(std::string("command failed: ") + s);
  }
  int compared = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "r1")) {
    if (!e.is_regular_file() || e.path().filename() == "train.log") continue;
    ++compared;
    differing += slurp(e.path()) != slurp(root / "r2" / fs::relative(e.path(), root / "r1"));
  }
  if (compared == 0 || differing > 0) problems.push_back(format("%d of %d files differ", differing, compared));

  const CoefficientSchedule s = random_schedule(0.02, 5.0, 99);
  save_schedule(s, root / "sched.json");
  const CoefficientSchedule back = load_schedule(root / "sched.json");
  bool sched_ok = back.dt == s.dt && back.steps() == s.steps();
  for (int i = 0; sched_ok && i < s.steps(); ++i)
    sched_ok = std::memcmp(back.a[i].data(), s.a[i].data(), sizeof(Coeffs)) == 0 &&
               std::memcmp(back.b[i].data(), s.b[i].data(), sizeof(Coeffs)) == 0;
  if (!sched_ok) problems.push_back("schedule round-trip not bit-exact");

  Image img{17, 11, std::vector<double>(17 * 11)};
  for (std::size_t k = 0; k < img.pixels.size(); ++k) img.pixels[k] = static_cast<double>((k * 37) % 256) / 255.0;
  for (const char* ext : {".pgm", ".png"}) {
    const fs::path p = root / (std::string("img") + ext);
    write_image(img, p);
    if (read_image(p).pixels != img.pixels) problems.push_back(std::string("8-bit round-trip lossy for ") + ext);
  }
  fs::remove_all(root);

  std::string detail = format("%d CLI output files identical across runs; schedule and image round-trips %s",
                              compared - differing, problems.empty() ? "exact" : "checked");
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  report("AC-1 ", 5, ac1);
  report("AC-2 ", 120, ac2);
  report("AC-3 ", 600, ac3);
  report("AC-4 ", 900, ac4);
  report("AC-5 ", 900, ac5);
  report("AC-6 ", 900, ac6);
  report("AC-7 ", 60, ac7);
  report("AC-8 ", 0, ac8);
  report("AC-9 ", 0, ac9);
  report("AC-10", 0, ac10);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
