#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lpde/dataset_io.hpp"
#include "lpde/error.hpp"
#include "lpde/gradcheck.hpp"
#include "lpde/invariants.hpp"
#include "lpde/metrics.hpp"
#include "lpde/parallel.hpp"
#include "lpde/trainer.hpp"

namespace fs = std::filesystem;
using namespace lpde;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

double shown_psnr(double p) { return std::min(p, kPsnrCap); }

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string manifest, out, log;
  std::optional<double> dt;
  double lambda = kDefaultRegularization, mu = kDefaultRegularization;
  TrainerConfig config;
  bool no_precondition = false;
};

int run_train(const TrainArgs& args) {
  const Manifest manifest = load_manifest(args.manifest);
  const std::vector<TrainingPair> pairs = load_pairs(manifest);
  TrainerConfig cfg = args.config;
  cfg.dt = args.dt.value_or(manifest.dt);
  cfg.reg = Regularization::uniform(args.lambda, args.mu);
  cfg.precondition = !args.no_precondition;

  std::ofstream log;
  if (!args.log.empty()) {
    log.open(args.log);
    if (!log) throw IoError("cannot open log '" + args.log + "' for writing");
  }
  auto emit = [&](const std::string& line) {
    std::cout << line << '\n' << std::flush;
    if (log) log << line << '\n' << std::flush;
  };
  emit("# iter J grad_norm alpha elapsed_s");
  const TrainingReport report = train(pairs, cfg, [&](const IterationRecord& r) {
    emit(format("%d %.10e %.6e %.6e %.3f", r.iteration, r.objective, r.grad_norm, r.step,
                r.elapsed_seconds));
  });
  emit("# termination: " + report.termination);
  save_schedule(report.schedule, args.out);
  return kOk;
}

// ---- apply ------------------------------------------------------------------

struct ApplyArgs {
  std::string coeffs, input, output, dump;
  int pad = kDefaultPad;
};

int run_apply(const ApplyArgs& args) {
  const CoefficientSchedule sched = load_schedule(args.coeffs);
  const Field image = load_image(args.input, args.pad);
  if (args.dump.empty()) {
    save_image(evolve_output(image, sched), args.output);
    return kOk;
  }
  const Trajectory traj = evolve(image, sched);
  fs::create_directories(args.dump);
  const std::string ext = fs::path(args.output).extension().string();
  for (int i = 0; i <= traj.steps(); ++i) {
    save_image(traj.u[i], fs::path(args.dump) / format("u_%04d%s", i, ext.c_str()));
    save_image(traj.v[i], fs::path(args.dump) / format("v_%04d%s", i, ext.c_str()));
  }
  save_image(traj.output(), args.output);
  return kOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string pred, truth, coeffs, manifest;
  bool f_measure = false;
  double tau = 0.5, alpha = 2.0;
};

int run_eval(const EvalArgs& args) {
  if (!args.pred.empty() || !args.truth.empty()) {
    if (args.pred.empty() || args.truth.empty()) {
      throw InvalidArgument("eval needs both --pred and --truth");
    }
    const Field pred = load_image(args.pred);
    const Field truth = load_image(args.truth);
    if (args.f_measure) {
      const double f = lpde::f_measure(threshold(truth, args.tau), threshold(pred, args.tau), args.alpha);
      std::cout << format("f_measure %.4f\n", f);
    } else {
      std::cout << format("psnr %.4f\n", shown_psnr(psnr(pred, truth)));
    }
    return kOk;
  }
  if (args.coeffs.empty() || args.manifest.empty()) {
    throw InvalidArgument("eval needs --pred/--truth or --coeffs/--manifest");
  }
  const CoefficientSchedule sched = load_schedule(args.coeffs);
  const std::vector<TrainingPair> pairs = load_pairs(load_manifest(args.manifest));
  std::cout << "# id psnr_output psnr_input\n";
  double sum_out = 0.0, sum_in = 0.0;
  for (const auto& p : pairs) {
    const double out = shown_psnr(psnr(evolve_output(p.input, sched), p.target));
    const double in = shown_psnr(psnr(p.input, p.target));
    sum_out += out;
    sum_in += in;
    std::cout << format("%s %.4f %.4f\n", p.id.c_str(), out, in);
  }
  const double n = static_cast<double>(pairs.size());
  std::cout << format("mean %.4f %.4f\n", sum_out / n, sum_in / n);
  return kOk;
}

// ---- gradcheck --------------------------------------------------------------

struct GradCheckArgs {
  std::string manifest, coeffs;
  double dt = 0.01;
  double random_scale = 0.0;
  double lambda = kDefaultRegularization, mu = kDefaultRegularization;
  GradCheckOptions options;
  bool verbose = false;
};

int run_gradcheck(const GradCheckArgs& args) {
  const std::vector<TrainingPair> pairs = load_pairs(load_manifest(args.manifest));
  CoefficientSchedule sched;
  if (!args.coeffs.empty()) {
    sched = load_schedule(args.coeffs);
  } else if (args.random_scale > 0.0) {
    sched = random_schedule(args.dt, args.random_scale, args.options.seed);
  } else {
    sched = CoefficientSchedule::zeros(args.dt);
  }
  const GradCheckResult r =
      check_gradient(pairs, sched, Regularization::uniform(args.lambda, args.mu), args.options);
  if (args.verbose) {
    std::cout << "# field step index adjoint finite_difference relative_error\n";
    for (const auto& e : r.entries) {
      std::cout << format("%c %d %d %.10e %.10e %.3e\n", e.is_b ? 'b' : 'a', e.step, e.index,
                          e.adjoint, e.finite_difference, e.relative_error);
    }
  }
  std::cout << format("entries %zu\nworst_relative_error %.6e\n%s\n", r.entries.size(),
                      r.worst_relative_error, r.passed ? "PASS" : "FAIL");
  return r.passed ? kOk : kNumerical;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string task = "identity", out, ext = ".pgm";
  std::vector<std::string> sources;
  int generate = 0, size = 64, heldout = 0;
  SyntheticTask task_options;
};

std::vector<fs::path> generated_sources(const fs::path& dir, int count, int size, std::uint64_t seed) {
  fs::create_directories(dir);
  std::vector<fs::path> paths;
  for (int k = 0; k < count; ++k) {
    paths.push_back(dir / format("source_%03d.pgm", k));
    write_image(make_texture(size, size, seed + static_cast<std::uint64_t>(k)), paths.back());
  }
  return paths;
}

int run_synth(SynthArgs args) {
  const std::vector<std::pair<std::string, SyntheticTask::Kind>> kinds = {
      {"identity", SyntheticTask::Kind::identity},
      {"blur", SyntheticTask::Kind::blur},
      {"diffuse", SyntheticTask::Kind::diffuse},
      {"noise", SyntheticTask::Kind::noise}};
  const auto kind = std::find_if(kinds.begin(), kinds.end(), [&](const auto& k) { return k.first == args.task; });
  if (kind == kinds.end()) throw InvalidArgument("unknown task '" + args.task + "'");
  args.task_options.kind = kind->second;

  const fs::path out(args.out);
  std::vector<fs::path> sources(args.sources.begin(), args.sources.end());
  if (args.generate > 0) {
    const auto made = generated_sources(out / "sources", args.generate, args.size, args.task_options.seed);
    sources.insert(sources.end(), made.begin(), made.end());
  }
  if (sources.empty()) throw InvalidArgument("synth needs --sources or --generate");
  const Manifest m = make_synthetic(args.task_options, sources, out, args.ext);
  std::cout << format("%zu pairs -> %s\n", m.entries.size(), (out / "manifest.json").string().c_str());

  if (args.heldout > 0) {
    SyntheticTask held = args.task_options;
    held.seed = args.task_options.seed + 1000;
    const auto made = generated_sources(out / "heldout" / "sources", args.heldout, args.size, held.seed);
    const Manifest h = make_synthetic(held, made, out / "heldout", args.ext);
    std::cout << format("%zu held-out pairs -> %s\n", h.entries.size(),
                        (out / "heldout" / "manifest.json").string().c_str());
  }
  return kOk;
}

// ---- invariants -------------------------------------------------------------

struct InvariantArgs {
  std::string input, indicator, out, ext = ".pgm";
};

int run_invariants(const InvariantArgs& args) {
  const Field u = load_image(args.input);
  const Field v = args.indicator.empty() ? u : load_image(args.indicator);
  if (!u.same_grid(v)) throw InvalidArgument("input and indicator sizes differ");
  const DerivativeChannels cu = derivatives(u);
  const DerivativeChannels cv = derivatives(v);
  const InvariantStack inv = compute_invariants(cu, cv);
  fs::create_directories(args.out);
  std::cout << "# index min max\n";
  for (int j = 0; j < kInvariantCount; ++j) {
    double lo = INFINITY, hi = -INFINITY;
    for (int y = 0; y < u.height(); ++y)
      for (int x = 0; x < u.width(); ++x) {
        lo = std::min(lo, inv[j](x, y));
        hi = std::max(hi, inv[j](x, y));
      }
    Field map(u.width(), u.height());
    const double range = hi - lo;
    for (int y = 0; y < u.height(); ++y)
      for (int x = 0; x < u.width(); ++x) map(x, y) = range > 0.0 ? (inv[j](x, y) - lo) / range : 0.0;
    save_image(map, fs::path(args.out) / format("inv_%02d%s", j, args.ext.c_str()));
    std::cout << format("%d %.10e %.10e\n", j, lo, hi);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn and apply coefficient schedules of coupled evolution PDEs on images"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = machine parallelism)");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Fit a coefficient schedule to a manifest of pairs");
  train_cmd->add_option("--manifest", ta.manifest, "Training manifest")->required();
  train_cmd->add_option("--out", ta.out, "Output schedule JSON")->required();
  train_cmd->add_option("--dt", ta.dt, "Time step (default: manifest dt)");
  train_cmd->add_option("--lambda", ta.lambda, "Penalty weight on a")->capture_default_str();
  train_cmd->add_option("--mu", ta.mu, "Penalty weight on b")->capture_default_str();
  train_cmd->add_option("--max-iters", ta.config.max_iters)->capture_default_str();
  train_cmd->add_option("--rel-tol", ta.config.rel_tol)->capture_default_str();
  train_cmd->add_option("--grad-tol", ta.config.grad_tol)->capture_default_str();
  train_cmd->add_option("--bracket-max", ta.config.bracket_max)->capture_default_str();
  train_cmd->add_option("--golden-tol", ta.config.golden_tol)->capture_default_str();
  train_cmd->add_option("--restart-period", ta.config.restart_period)->capture_default_str();
  train_cmd->add_option("--init-damping", ta.config.init_damping)->capture_default_str();
  train_cmd->add_option("--seed", ta.config.seed)->capture_default_str();
  train_cmd->add_flag("--no-precondition", ta.no_precondition, "Plain gradient metric in the CG search");
  train_cmd->add_option("--log", ta.log, "Also write the iteration log here");

  ApplyArgs aa;
  auto* apply_cmd = app.add_subcommand("apply", "Evolve an image under a schedule");
  apply_cmd->add_option("--coeffs", aa.coeffs, "Schedule JSON")->required();
  apply_cmd->add_option("--input", aa.input, "Input image")->required();
  apply_cmd->add_option("--output", aa.output, "Output image (.pgm or .png)")->required();
  apply_cmd->add_option("--dump-trajectory", aa.dump, "Directory for every u and v state");
  apply_cmd->add_option("--pad", aa.pad, "Halo width")->capture_default_str();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR or F-measure of images, or of a schedule on a manifest");
  eval_cmd->add_option("--pred", ea.pred);
  eval_cmd->add_option("--truth", ea.truth);
  eval_cmd->add_option("--coeffs", ea.coeffs);
  eval_cmd->add_option("--manifest", ea.manifest);
  eval_cmd->add_flag("--f-measure", ea.f_measure, "Score thresholded masks instead of PSNR");
  eval_cmd->add_option("--tau", ea.tau, "Mask threshold")->capture_default_str();
  eval_cmd->add_option("--alpha", ea.alpha, "F-measure weight")->capture_default_str();

  GradCheckArgs ga;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare adjoint gradients with finite differences");
  grad_cmd->add_option("--manifest", ga.manifest)->required();
  grad_cmd->add_option("--dt", ga.dt)->capture_default_str();
  grad_cmd->add_option("--eps", ga.options.eps)->capture_default_str();
  grad_cmd->add_option("--entries", ga.options.entries)->capture_default_str();
  grad_cmd->add_option("--seed", ga.options.seed)->capture_default_str();
  grad_cmd->add_option("--tolerance", ga.options.tolerance)->capture_default_str();
  grad_cmd->add_option("--random-scale", ga.random_scale, "Check at a random schedule in [-s, s]");
  grad_cmd->add_option("--coeffs", ga.coeffs, "Check at this schedule");
  grad_cmd->add_option("--lambda", ga.lambda)->capture_default_str();
  grad_cmd->add_option("--mu", ga.mu)->capture_default_str();
  grad_cmd->add_flag("--verbose", ga.verbose, "Print every sampled entry");

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic training set and manifest");
  synth_cmd->add_option("--task", sa.task, "identity | blur | diffuse | noise")->capture_default_str();
  synth_cmd->add_option("--out", sa.out, "Output directory")->required();
  synth_cmd->add_option("--sources", sa.sources, "Source images");
  synth_cmd->add_option("--generate", sa.generate, "Number of generated source textures");
  synth_cmd->add_option("--size", sa.size, "Side of generated textures")->capture_default_str();
  synth_cmd->add_option("--heldout", sa.heldout, "Generated held-out pairs under <out>/heldout");
  synth_cmd->add_option("--sigma", sa.task_options.sigma, "Blur sigma")->capture_default_str();
  synth_cmd->add_option("--coef", sa.task_options.coef, "Diffusion coefficient")->capture_default_str();
  synth_cmd->add_option("--time", sa.task_options.time, "Diffusion time")->capture_default_str();
  synth_cmd->add_option("--dt", sa.task_options.dt, "Time step stored in the manifest")->capture_default_str();
  synth_cmd->add_option("--noise-sigma", sa.task_options.noise_sigma)->capture_default_str();
  synth_cmd->add_option("--seed", sa.task_options.seed)->capture_default_str();
  synth_cmd->add_flag("--exchange", sa.task_options.exchange, "Swap input and target roles");
  synth_cmd->add_option("--ext", sa.ext, ".pgm or .png")->capture_default_str();

  InvariantArgs ia;
  auto* inv_cmd = app.add_subcommand("invariants", "Dump min-max normalized invariant maps");
  inv_cmd->add_option("--input", ia.input, "Image for u")->required();
  inv_cmd->add_option("--indicator", ia.indicator, "Image for v (default: the input)");
  inv_cmd->add_option("--out", ia.out, "Output directory")->required();
  inv_cmd->add_option("--ext", ia.ext)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    set_thread_limit(threads);
    if (*train_cmd) return run_train(ta);
    if (*apply_cmd) return run_apply(aa);
    if (*eval_cmd) return run_eval(ea);
    if (*grad_cmd) return run_gradcheck(ga);
    if (*synth_cmd) return run_synth(sa);
    if (*inv_cmd) return run_invariants(ia);
  } catch (const BlowUpError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
