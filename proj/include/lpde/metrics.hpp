#pragma once

#include <cstdint>
#include <vector>

#include "lpde/fields.hpp"

namespace lpde {

/// Text reports print PSNR of identical images as this value.
inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over the interior, peak 1. Identical inputs give +infinity.
double psnr(const Field& pred, const Field& truth);

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

/// Pixel is set iff value >= tau.
BinaryMask threshold(const Field& mask_map, double tau);

/// F_alpha = (1 + alpha) R P / (alpha P + R), recall R = |A & B| / |A|,
/// precision P = |A & B| / |B|. Both masks empty scores 1, exactly one empty scores 0.
double f_measure(const BinaryMask& truth, const BinaryMask& pred, double alpha = 2.0);

}  // namespace lpde
