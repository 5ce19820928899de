#include "pwcc/baselines.hpp"

#include <algorithm>

#include "pwcc/color.hpp"

namespace pwcc {

IlluminationMap gray_world(const LinearImage& img) {
  validate(img);
  if (img.empty()) throw EstimationError("gray_world: empty image");
  double sum[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    auto p = img.pixel(i);
    for (int c = 0; c < 3; ++c) sum[c] += p[c];
  }
  const double n = static_cast<double>(img.pixel_count());
  const double mean[3] = {sum[0] / n, sum[1] / n, sum[2] / n};
  for (int c = 0; c < 3; ++c) {
    if (mean[c] <= 1e-8) {
      throw EstimationError("gray_world: channel " + std::to_string(c) + " mean is degenerate");
    }
  }
  return constant_map(img.width(), img.height(), mean[1] / mean[0], 1.0, mean[1] / mean[2]);
}

IlluminationMap white_patch(const LinearImage& img) {
  validate(img);
  if (img.empty()) throw EstimationError("white_patch: empty image");
  double peak[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    auto p = img.pixel(i);
    for (int c = 0; c < 3; ++c) peak[c] = std::max(peak[c], p[c]);
  }
  for (int c = 0; c < 3; ++c) {
    if (peak[c] <= 0.0) {
      throw EstimationError("white_patch: channel " + std::to_string(c) + " is all zero");
    }
  }
  return constant_map(img.width(), img.height(), peak[1] / peak[0], 1.0, peak[1] / peak[2]);
}

}  // namespace pwcc
