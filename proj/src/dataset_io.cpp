#include "lpde/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <png.h>

#include <json.hpp>

#include "lpde/error.hpp"

namespace lpde {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Image decode_pgm(const std::string& bytes, const fs::path& path) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw IoError("'" + path.string() + "': malformed PGM header");
    return std::stol(bytes.substr(start, pos - start));
  };
  const long width = next_token();
  const long height = next_token();
  const long maxval = next_token();
  if (maxval != 255) {
    throw IoError("'" + path.string() + "': only 8-bit PGM (maxval 255) is supported, got maxval " +
                  std::to_string(maxval));
  }
  ++pos;  // single whitespace before the raster
  if (width < kMinExtent || height < kMinExtent) {
    throw IoError("'" + path.string() + "': image " + std::to_string(width) + "x" +
                  std::to_string(height) + " is below the 3x3 minimum");
  }
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + count) throw IoError("'" + path.string() + "': truncated PGM raster");
  Image img{static_cast<int>(width), static_cast<int>(height), std::vector<double>(count)};
  for (std::size_t i = 0; i < count; ++i) {
    img.pixels[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  }
  return img;
}

Image decode_png(const fs::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError("'" + path.string() + "': " + png.message);
  }
  const auto fail = [&](const std::string& why) {
    png_image_free(&png);
    throw IoError("'" + path.string() + "': " + why);
  };
  if (png.format & PNG_FORMAT_FLAG_COLOR) fail("color PNG is not supported (single channel only)");
  if (png.format & PNG_FORMAT_FLAG_ALPHA) fail("PNG with alpha is not supported (single channel only)");
  if (png.format & PNG_FORMAT_FLAG_LINEAR) fail("16-bit PNG is not supported");
  if (png.width < kMinExtent || png.height < kMinExtent) fail("image is below the 3x3 minimum");
  png.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    fail(png.message);
  }
  Image img{static_cast<int>(png.width), static_cast<int>(png.height),
            std::vector<double>(buffer.size())};
  for (std::size_t i = 0; i < buffer.size(); ++i) img.pixels[i] = buffer[i] / 255.0;
  png_image_free(&png);
  return img;
}

std::vector<std::uint8_t> quantize(const Image& image) {
  std::vector<std::uint8_t> q(image.pixels.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    q[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return q;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Coeffs parse_row(const json& row, const char* name, std::size_t i) {
  if (!row.is_array() || row.size() != kInvariantCount) {
    throw IoError(std::string("schedule row ") + name + "[" + std::to_string(i) + "] must hold " +
                  std::to_string(kInvariantCount) + " numbers");
  }
  Coeffs c;
  for (int j = 0; j < kInvariantCount; ++j) {
    if (!row[j].is_number()) throw IoError(std::string("schedule entry in ") + name + " is not a number");
    c[j] = row[j].get<double>();
  }
  return c;
}

}  // namespace

Image read_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("image '" + path.string() + "' does not exist");
  const std::string bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes, path);
  static const unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) return decode_png(path);
  throw IoError("'" + path.string() + "': unsupported image format (expected binary PGM or PNG)");
}

Field load_image(const fs::path& path, int pad) { return lpde::pad(read_image(path), pad); }

void write_image(const Image& image, const fs::path& path) {
  const std::vector<std::uint8_t> q = quantize(image);
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    std::string bytes = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                        "\n255\n";
    bytes.append(reinterpret_cast<const char*>(q.data()), q.size());
    write_file(path, bytes);
  } else if (ext == ".png") {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&png, path.c_str(), 0, q.data(), 0, nullptr)) {
      const std::string why = png.message;
      png_image_free(&png);
      throw IoError("cannot write '" + path.string() + "': " + why);
    }
  } else {
    throw IoError("'" + path.string() + "': unknown image extension (use .pgm or .png)");
  }
}

void save_image(const Field& f, const fs::path& path) { write_image(unpad(f), path); }

std::string schedule_to_json(const CoefficientSchedule& sched) {
  sched.validate();
  json doc;
  doc["dt"] = sched.dt;
  doc["T_m"] = sched.steps();
  json a = json::array();
  json b = json::array();
  for (int i = 0; i < sched.steps(); ++i) {
    a.push_back(sched.a[i]);
    b.push_back(sched.b[i]);
  }
  doc["a"] = std::move(a);
  doc["b"] = std::move(b);
  return doc.dump(1) + "\n";
}

CoefficientSchedule schedule_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("schedule is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dt") || !doc.contains("T_m") || !doc.contains("a") ||
      !doc.contains("b")) {
    throw IoError("schedule must be an object with dt, T_m, a and b");
  }
  if (!doc["dt"].is_number() || !doc["T_m"].is_number_integer()) {
    throw IoError("schedule dt must be a number and T_m an integer");
  }
  CoefficientSchedule s;
  s.dt = doc["dt"].get<double>();
  if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw IoError("schedule dt must be positive");
  const long long steps = doc["T_m"].get<long long>();
  if (steps != step_count(s.dt)) {
    throw IoError("schedule T_m = " + std::to_string(steps) + " does not match dt (expected " +
                  std::to_string(step_count(s.dt)) + ")");
  }
  const json& a = doc["a"];
  const json& b = doc["b"];
  if (!a.is_array() || !b.is_array() || static_cast<long long>(a.size()) != steps ||
      static_cast<long long>(b.size()) != steps) {
    throw IoError("schedule arrays a and b must each hold T_m rows");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    s.a.push_back(parse_row(a[i], "a", i));
    s.b.push_back(parse_row(b[i], "b", i));
  }
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(e.what());
  }
  return s;
}

void save_schedule(const CoefficientSchedule& sched, const fs::path& path) {
  write_file(path, schedule_to_json(sched));
}

CoefficientSchedule load_schedule(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("schedule '" + path.string() + "' does not exist");
  try {
    return schedule_from_json(read_file(path));
  } catch (const IoError& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("manifest '" + path.string() + "' does not exist");
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  const fs::path base = path.parent_path();
  Manifest m;
  if (doc.contains("dt")) m.dt = doc["dt"].get<double>();
  if (doc.contains("pad")) m.pad = doc["pad"].get<int>();
  if (!doc.contains("pairs") || !doc["pairs"].is_array() || doc["pairs"].empty()) {
    throw IoError("manifest '" + path.string() + "' must list at least one pair");
  }
  std::set<std::pair<fs::path, fs::path>> seen;
  for (const auto& entry : doc["pairs"]) {
    if (!entry.contains("input") || !entry.contains("target")) {
      throw IoError("manifest '" + path.string() + "': every pair needs input and target");
    }
    ManifestEntry e;
    e.input = base / entry["input"].get<std::string>();
    e.target = base / entry["target"].get<std::string>();
    e.id = entry.value("id", e.input.stem().string());
    for (const auto& p : {e.input, e.target}) {
      if (!fs::exists(p)) throw IoError("manifest entry '" + e.id + "': missing file '" + p.string() + "'");
    }
    const fs::path in = fs::weakly_canonical(e.input), out = fs::weakly_canonical(e.target);
    if (in == out) throw IoError("manifest entry '" + e.id + "': input and target are the same file");
    if (!seen.emplace(in, out).second) {
      throw IoError("manifest entry '" + e.id + "': repeats an earlier pair");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  json doc;
  doc["dt"] = manifest.dt;
  doc["pad"] = manifest.pad;
  json pairs = json::array();
  for (const auto& e : manifest.entries) {
    pairs.push_back({{"input", fs::relative(e.input, base).generic_string()},
                     {"target", fs::relative(e.target, base).generic_string()},
                     {"id", e.id}});
  }
  doc["pairs"] = std::move(pairs);
  write_file(path, doc.dump(2) + "\n");
}

std::vector<TrainingPair> load_pairs(const Manifest& manifest) {
  std::vector<TrainingPair> pairs;
  for (const auto& e : manifest.entries) {
    TrainingPair p{load_image(e.input, manifest.pad), load_image(e.target, manifest.pad), e.id};
    if (!p.input.same_grid(p.target)) {
      throw IoError("pair '" + e.id + "': input and target sizes differ");
    }
    if (!pairs.empty() && !p.input.same_grid(pairs.front().input)) {
      throw IoError("pair '" + e.id + "': all pairs in one manifest must share one image size");
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

Image make_texture(int width, int height, std::uint64_t seed) {
  if (width < kMinExtent || height < kMinExtent) throw InvalidArgument("texture too small");
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); };
  const double extent = std::min(width, height);

  struct Bump {
    double cx, cy, r, amp;
  };
  std::vector<Bump> bumps(12);
  for (auto& b : bumps) b = {uni(0, width), uni(0, height), uni(extent / 16, extent / 4), uni(-1, 1)};
  const double gx = uni(-1, 1) / width;
  const double gy = uni(-1, 1) / height;
  const double f1 = uni(1, 3) * 2.0 * std::numbers::pi / extent;
  const double f2 = uni(1, 3) * 2.0 * std::numbers::pi / extent;
  const double ph1 = uni(0, 2 * std::numbers::pi);
  const double ph2 = uni(0, 2 * std::numbers::pi);

  Image img{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = gx * x + gy * y + 0.3 * std::cos(f1 * x + ph1) * std::cos(f2 * y + ph2);
      for (const auto& b : bumps) {
        const double dx = x - b.cx;
        const double dy = y - b.cy;
        v += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.r * b.r));
      }
      img.at(x, y) = v;
    }
  }
  const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  const double mn = *lo;
  const double span = std::max(*hi - mn, 1e-12);
  for (double& v : img.pixels) v = 0.1 + 0.8 * (v - mn) / span;
  return img;
}

Image gaussian_blur(const Image& image, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("blur sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const int size = 2 * radius + 1;
  std::vector<double> kernel(static_cast<std::size_t>(size) * size);
  double total = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kernel[static_cast<std::size_t>(dy + radius) * size + (dx + radius)] = w;
      total += w;
    }
  }
  for (double& w : kernel) w /= total;

  Image out{image.width, image.height, std::vector<double>(image.pixels.size(), 0.0)};
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      double s = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int sy = y - dy;
        if (sy < 0 || sy >= image.height) continue;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int sx = x - dx;
          if (sx < 0 || sx >= image.width) continue;
          s += kernel[static_cast<std::size_t>(dy + radius) * size + (dx + radius)] * image.at(sx, sy);
        }
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

Image diffuse(const Image& image, double coef, double time, double dt) {
  if (!(dt > 0.0) || !(time >= 0.0)) throw InvalidArgument("diffuse: bad time parameters");
  const int w = image.width;
  const int h = image.height;
  const int steps = static_cast<int>(std::floor(time / dt + 0.5));
  // One-pixel zero frame around the image.
  const int stride = w + 2;
  std::vector<double> cur(static_cast<std::size_t>(stride) * (h + 2), 0.0);
  std::vector<double> next = cur;
  auto idx = [stride](int x, int y) { return static_cast<std::size_t>(y + 1) * stride + (x + 1); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) cur[idx(x, y)] = image.at(x, y);
  for (int s = 0; s < steps; ++s) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double c = cur[idx(x, y)];
        const double lap = (cur[idx(x - 1, y)] - 2.0 * c + cur[idx(x + 1, y)]) +
                           (cur[idx(x, y - 1)] - 2.0 * c + cur[idx(x, y + 1)]);
        next[idx(x, y)] = c + dt * (coef * lap);
      }
    }
    std::swap(cur, next);
  }
  Image out{w, h, std::vector<double>(image.pixels.size())};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = cur[idx(x, y)];
  return out;
}

Image add_noise(const Image& image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  Image out = image;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  double spare = 0.0;
  bool have_spare = false;
  for (double& v : out.pixels) {
    double z;
    if (have_spare) {
      z = spare;
      have_spare = false;
    } else {
      const double u1 = unit_uniform(rng);
      const double u2 = unit_uniform(rng);
      const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
      z = r * std::cos(2.0 * std::numbers::pi * u2);
      spare = r * std::sin(2.0 * std::numbers::pi * u2);
      have_spare = true;
    }
    v = std::clamp(v + sigma * z, 0.0, 1.0);
  }
  return out;
}

Image apply_task(const SyntheticTask& task, const Image& source, int index) {
  switch (task.kind) {
    case SyntheticTask::Kind::identity: return source;
    case SyntheticTask::Kind::blur: return gaussian_blur(source, task.sigma);
    case SyntheticTask::Kind::diffuse: return diffuse(source, task.coef, task.time, task.dt);
    case SyntheticTask::Kind::noise:
      return add_noise(source, task.noise_sigma, task.seed + static_cast<std::uint64_t>(index));
  }
  return source;
}

Manifest make_synthetic(const SyntheticTask& task, const std::vector<fs::path>& sources,
                        const fs::path& out_dir, const std::string& extension,
                        const std::string& manifest_name) {
  if (sources.empty()) throw InvalidArgument("synthetic task needs at least one source image");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  Manifest m;
  m.dt = task.dt;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const Image source = read_image(sources[k]);
    const Image produced = apply_task(task, source, static_cast<int>(k));
    char id[32];
    std::snprintf(id, sizeof(id), "%03zu", k);
    ManifestEntry e{out_dir / ("input_" + std::string(id) + extension),
                    out_dir / ("target_" + std::string(id) + extension), id};
    write_image(task.exchange ? produced : source, e.input);
    write_image(task.exchange ? source : produced, e.target);
    m.entries.push_back(std::move(e));
  }
  save_manifest(m, out_dir / manifest_name);
  return m;
}

}  // namespace lpde
