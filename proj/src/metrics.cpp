#include "lpde/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lpde/error.hpp"

namespace lpde {

double psnr(const Field& pred, const Field& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height()) {
    throw InvalidArgument("psnr: image dimensions differ");
  }
  double sum = 0.0;
  for (int y = 0; y < pred.height(); ++y) {
    for (int x = 0; x < pred.width(); ++x) {
      const double r = pred(x, y) - truth(x, y);
      sum += r * r;
    }
  }
  const double mse = sum / static_cast<double>(pred.interior_size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

BinaryMask threshold(const Field& mask_map, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("threshold must lie in (0, 1)");
  BinaryMask m{mask_map.width(), mask_map.height(), {}};
  m.bits.resize(mask_map.interior_size());
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      m.bits[static_cast<std::size_t>(y) * m.width + x] = mask_map(x, y) >= tau ? 1 : 0;
  return m;
}

double f_measure(const BinaryMask& truth, const BinaryMask& pred, double alpha) {
  if (truth.width != pred.width || truth.height != pred.height) {
    throw InvalidArgument("f_measure: mask dimensions differ");
  }
  if (!(alpha > 0.0)) throw InvalidArgument("f_measure: alpha must be positive");
  std::size_t both = 0;
  for (std::size_t i = 0; i < truth.bits.size(); ++i) both += (truth.bits[i] && pred.bits[i]) ? 1 : 0;
  const std::size_t a = truth.count();
  const std::size_t b = pred.count();
  if (a == 0 && b == 0) return 1.0;
  if (a == 0 || b == 0) return 0.0;
  if (both == 0) return 0.0;
  const double recall = static_cast<double>(both) / static_cast<double>(a);
  const double precision = static_cast<double>(both) / static_cast<double>(b);
  return (1.0 + alpha) * recall * precision / (alpha * precision + recall);
}

}  // namespace lpde
