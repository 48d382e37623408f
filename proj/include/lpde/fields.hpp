#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lpde {

inline constexpr int kDefaultPad = 2;
inline constexpr int kMinExtent = 3;

/// Scalar image sampled on a zero-padded pixel grid.
///
/// Coordinates are interior-relative: x in [0, width) is a column, y in
/// [0, height) a row; the halo extends `pad` nodes beyond on every side and
/// is held at zero (homogeneous Dirichlet boundary).
class Field {
 public:
  Field() = default;
  Field(int width, int height, int pad = kDefaultPad);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int pad() const noexcept { return pad_; }
  int stride() const noexcept { return width_ + 2 * pad_; }
  int rows() const noexcept { return height_ + 2 * pad_; }
  std::size_t interior_size() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y + pad_) * static_cast<std::size_t>(stride()) +
           static_cast<std::size_t>(x + pad_);
  }
  double& operator()(int x, int y) noexcept { return values_[index(x, y)]; }
  double operator()(int x, int y) const noexcept { return values_[index(x, y)]; }

  /// Pointer to interior node (0, y); the row's halo lies at negative offsets.
  double* row(int y) noexcept { return values_.data() + index(0, y); }
  const double* row(int y) const noexcept { return values_.data() + index(0, y); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_grid(const Field& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && pad_ == other.pad_;
  }

  void zero_halo() noexcept;
  void fill_interior(double value) noexcept;
  bool all_finite() const noexcept;
  /// Largest |value| over the interior.
  double max_abs() const noexcept;

 private:
  int width_ = 0;
  int height_ = 0;
  int pad_ = 0;
  std::vector<double> values_;
};

/// Row-major image of `width * height` samples without padding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Partial-derivative channel, named by the derivative it holds.
enum class Channel : int { value = 0, dx = 1, dy = 2, dxx = 3, dxy = 4, dyy = 5 };
inline constexpr int kChannelCount = 6;
inline constexpr std::array<Channel, kChannelCount> kChannels = {
    Channel::value, Channel::dx, Channel::dy, Channel::dxx, Channel::dxy, Channel::dyy};

/// Differentiation orders (p, q) of a channel: d^{p+q} / dx^p dy^q.
constexpr std::array<int, 2> channel_orders(Channel c) {
  switch (c) {
    case Channel::value: return {0, 0};
    case Channel::dx: return {1, 0};
    case Channel::dy: return {0, 1};
    case Channel::dxx: return {2, 0};
    case Channel::dxy: return {1, 1};
    case Channel::dyy: return {0, 2};
  }
  return {0, 0};
}

/// The six channel values at one node, indexed by Channel.
using Jet = std::array<double, kChannelCount>;

struct DerivativeChannels {
  std::array<Field, kChannelCount> channels;

  const Field& operator[](Channel c) const { return channels[static_cast<int>(c)]; }
  Field& operator[](Channel c) { return channels[static_cast<int>(c)]; }
  Jet jet(int x, int y) const;
};

/// Zero-pads an unpadded image. Rejects non-finite samples and extents below 3.
Field pad(const Image& image, int pad = kDefaultPad);
/// Interior samples of a Field as an unpadded image.
Image unpad(const Field& f);

/// Central-difference stencils at one interior node (unit grid spacing).
Jet jet_at(const Field& f, int x, int y) noexcept;
/// Single discrete derivative of `f` evaluated on the interior; halo of the result is zero.
Field derivative(const Field& f, Channel c);
DerivativeChannels derivatives(const Field& f);

/// Mean over the interior, (1/N) sum f. Summation is sequential in row-major order.
double integrate_space(const Field& f);
/// Mean over the interior of the pointwise product f * g.
double integrate_space(const Field& f, const Field& g);
/// dt * sum(samples); requires samples.size() == step_count(dt) + 1.
double integrate_time(std::span<const double> samples, double dt);

/// Number of explicit steps that reach t = 1: floor(1/dt + 0.5).
int step_count(double dt);

/// Quarter-turn of a square field: result(x, y) = f(n-1-y, x).
/// Channels transform as dx -> dy, dy -> -dx, dxx <-> dyy, dxy -> -dxy.
Field rotate90(const Field& f);
/// Integer shift of the interior content, result(x, y) = f(x - dx, y - dy); vacated nodes are zero.
Field shift(const Field& f, int dx, int dy);

}  // namespace lpde
