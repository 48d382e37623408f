#include "lpde/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lpde/error.hpp"

namespace lpde {

Field::Field(int width, int height, int pad) : width_(width), height_(height), pad_(pad) {
  if (width < kMinExtent || height < kMinExtent) {
    throw InvalidArgument("field extent " + std::to_string(width) + "x" + std::to_string(height) +
                          " is below the 3x3 minimum");
  }
  if (pad < 2) throw InvalidArgument("halo width must be at least 2, got " + std::to_string(pad));
  values_.assign(static_cast<std::size_t>(stride()) * static_cast<std::size_t>(rows()), 0.0);
}

void Field::zero_halo() noexcept {
  const int s = stride();
  for (int r = 0; r < rows(); ++r) {
    double* row = values_.data() + static_cast<std::size_t>(r) * s;
    if (r < pad_ || r >= pad_ + height_) {
      std::fill(row, row + s, 0.0);
    } else {
      std::fill(row, row + pad_, 0.0);
      std::fill(row + pad_ + width_, row + s, 0.0);
    }
  }
}

void Field::fill_interior(double value) noexcept {
  for (int y = 0; y < height_; ++y) {
    double* row = this->row(y);
    std::fill(row, row + width_, value);
  }
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const noexcept {
  double m = 0.0;
  for (int y = 0; y < height_; ++y) {
    const double* row = this->row(y);
    for (int x = 0; x < width_; ++x) m = std::max(m, std::abs(row[x]));
  }
  return m;
}

Jet DerivativeChannels::jet(int x, int y) const {
  Jet j;
  for (int c = 0; c < kChannelCount; ++c) j[c] = channels[c](x, y);
  return j;
}

Field pad(const Image& image, int pad) {
  if (image.width < kMinExtent || image.height < kMinExtent) {
    throw InvalidArgument("image " + std::to_string(image.width) + "x" +
                          std::to_string(image.height) + " is below the 3x3 minimum");
  }
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw InvalidArgument("image pixel count does not match its dimensions");
  }
  Field f(image.width, image.height, pad);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double v = image.at(x, y);
      if (!std::isfinite(v)) {
        throw InvalidArgument("non-finite pixel at (" + std::to_string(x) + ", " +
                              std::to_string(y) + ")");
      }
      f(x, y) = v;
    }
  }
  return f;
}

Image unpad(const Field& f) {
  Image img{f.width(), f.height(), std::vector<double>(f.interior_size())};
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) img.at(x, y) = f(x, y);
  return img;
}

Jet jet_at(const Field& f, int x, int y) noexcept {
  const std::size_t s = static_cast<std::size_t>(f.stride());
  const double* c = f.values().data() + f.index(x, y);
  const double n = c[-static_cast<std::ptrdiff_t>(s)];
  const double so = c[s];
  const double w = c[-1];
  const double e = c[1];
  const double ne = c[1 - static_cast<std::ptrdiff_t>(s)];
  const double nw = c[-1 - static_cast<std::ptrdiff_t>(s)];
  const double se = c[s + 1];
  const double sw = c[s - 1];
  Jet j;
  j[0] = c[0];
  j[1] = (e - w) * 0.5;
  j[2] = (so - n) * 0.5;
  j[3] = w - 2.0 * c[0] + e;
  j[4] = ((se - ne) - (sw - nw)) * 0.25;
  j[5] = n - 2.0 * c[0] + so;
  return j;
}

Field derivative(const Field& f, Channel c) {
  Field out(f.width(), f.height(), f.pad());
  const int k = static_cast<int>(c);
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) out(x, y) = jet_at(f, x, y)[k];
  return out;
}

DerivativeChannels derivatives(const Field& f) {
  DerivativeChannels d;
  for (auto& ch : d.channels) ch = Field(f.width(), f.height(), f.pad());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const Jet j = jet_at(f, x, y);
      for (int k = 0; k < kChannelCount; ++k) d.channels[k](x, y) = j[k];
    }
  }
  return d;
}

double integrate_space(const Field& f) {
  double sum = 0.0;
  for (int y = 0; y < f.height(); ++y) {
    const double* row = f.row(y);
    for (int x = 0; x < f.width(); ++x) sum += row[x];
  }
  return sum / static_cast<double>(f.interior_size());
}

double integrate_space(const Field& f, const Field& g) {
  if (!f.same_grid(g)) throw InvalidArgument("integrate_space: grid mismatch");
  double sum = 0.0;
  for (int y = 0; y < f.height(); ++y) {
    const double* a = f.row(y);
    const double* b = g.row(y);
    for (int x = 0; x < f.width(); ++x) sum += a[x] * b[x];
  }
  return sum / static_cast<double>(f.interior_size());
}

int step_count(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidArgument("time step must be positive and finite");
  }
  return static_cast<int>(std::floor(1.0 / dt + 0.5));
}

double integrate_time(std::span<const double> samples, double dt) {
  const int steps = step_count(dt);
  if (samples.size() != static_cast<std::size_t>(steps) + 1) {
    throw InvalidArgument("integrate_time: expected " + std::to_string(steps + 1) +
                          " samples, got " + std::to_string(samples.size()));
  }
  double sum = 0.0;
  for (double s : samples) sum += s;
  return dt * sum;
}

Field rotate90(const Field& f) {
  if (f.width() != f.height()) throw InvalidArgument("rotate90 requires a square field");
  const int n = f.width();
  Field out(n, n, f.pad());
  const int p = f.pad();
  for (int y = -p; y < n + p; ++y)
    for (int x = -p; x < n + p; ++x) out(x, y) = f(n - 1 - y, x);
  return out;
}

Field shift(const Field& f, int dx, int dy) {
  Field out(f.width(), f.height(), f.pad());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const int sx = x - dx;
      const int sy = y - dy;
      if (sx >= 0 && sx < f.width() && sy >= 0 && sy < f.height()) out(x, y) = f(sx, sy);
    }
  }
  return out;
}

}  // namespace lpde
