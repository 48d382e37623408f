#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lpde/fields.hpp"
#include "lpde/forward_solver.hpp"
#include "lpde/objective.hpp"

namespace lpde {

// ---- images -------------------------------------------------------------

/// Reads an 8-bit grayscale PGM (P5, maxval 255) or PNG, scaled to [0, 1] by value / 255.
Image read_image(const std::filesystem::path& path);
Field load_image(const std::filesystem::path& path, int pad = kDefaultPad);

/// Clamps to [0, 1], quantizes round(255 v) and writes PGM or PNG chosen by extension.
void write_image(const Image& image, const std::filesystem::path& path);
void save_image(const Field& f, const std::filesystem::path& path);

// ---- schedules ----------------------------------------------------------

/// {"dt": number, "T_m": integer, "a": [[17 numbers] x T_m], "b": [...]}.
/// Numbers are written in shortest round-trip form.
void save_schedule(const CoefficientSchedule& sched, const std::filesystem::path& path);
CoefficientSchedule load_schedule(const std::filesystem::path& path);
std::string schedule_to_json(const CoefficientSchedule& sched);
CoefficientSchedule schedule_from_json(const std::string& text);

// ---- manifests ----------------------------------------------------------

struct ManifestEntry {
  std::filesystem::path input;
  std::filesystem::path target;
  std::string id;
};

/// Training set description:
/// {"dt": 0.02, "pad": 2, "pairs": [{"input": "...", "target": "...", "id": "..."}]}.
/// Relative paths resolve against the manifest's directory.
struct Manifest {
  std::vector<ManifestEntry> entries;
  int pad = kDefaultPad;
  double dt = 0.02;
};

Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
/// Loads every pair; all images must share one size.
std::vector<TrainingPair> load_pairs(const Manifest& manifest);

// ---- synthetic tasks ----------------------------------------------------

/// Smooth random image in [0.1, 0.9]: Gaussian bumps over a tilted plane and
/// low-frequency cosines, all drawn from a seeded mt19937_64.
Image make_texture(int width, int height, std::uint64_t seed);

/// Direct convolution with a Gaussian truncated at radius ceil(3 sigma) and
/// renormalized to unit sum; samples outside the image count as zero.
Image gaussian_blur(const Image& image, double sigma);

/// Heat equation u_t = coef * laplacian(u) with zero boundary, explicit steps
/// of size dt up to `time`.
Image diffuse(const Image& image, double coef, double time, double dt);

/// Adds sigma * N(0, 1) per pixel in row-major order and clips to [0, 1].
/// Normals come from Box-Muller on mt19937_64(seed) draws: u = (r >> 11) * 2^-53,
/// z0 = sqrt(-2 ln(1 - u1)) cos(2 pi u2), z1 = ... sin(2 pi u2), used in that order.
Image add_noise(const Image& image, double sigma, std::uint64_t seed);

struct SyntheticTask {
  enum class Kind { identity, blur, diffuse, noise };
  Kind kind = Kind::identity;
  double sigma = 1.0;
  double coef = 0.5;
  double time = 1.0;
  double dt = 0.02;
  double noise_sigma = 15.0 / 255.0;
  std::uint64_t seed = 0;
  /// Swap input and target roles (deblurring, denoising).
  bool exchange = false;
};

/// Applies the task's oracle to one image. Noise uses seed + index.
Image apply_task(const SyntheticTask& task, const Image& source, int index);

/// Writes input_<id> and target_<id> images plus manifest.json into out_dir.
Manifest make_synthetic(const SyntheticTask& task,
                        const std::vector<std::filesystem::path>& sources,
                        const std::filesystem::path& out_dir, const std::string& extension = ".pgm",
                        const std::string& manifest_name = "manifest.json");

}  // namespace lpde
