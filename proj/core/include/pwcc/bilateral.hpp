#pragma once

#include "pwcc/image.hpp"

namespace pwcc {

enum class RangeMode {
  // One range weight per pixel pair from the Euclidean RGB distance.
  kJoint,
  // Each channel weighted by its own absolute difference.
  kPerChannel,
};

struct BilateralConfig {
  double sigma_s = 75.0;
  // 75 on an 8-bit scale, expressed in normalized units.
  double sigma_r = 75.0 / 255.0;
  int diameter = 9;
  RangeMode mode = RangeMode::kJoint;

  static BilateralConfig defaults() { return {}; }
};

// Throws InvalidArgumentError unless sigma_s, sigma_r > 0 and diameter is odd
// and >= 1.
void validate(const BilateralConfig& cfg);

// out(p) = sum_q Gs(|p - q|) Gr(|I_p - I_q|) I_q / sum_q Gs Gr over the
// diameter x diameter window centred on p, clipped at the borders.
template <class Tag>
PixelBuffer<Tag, 3> bilateral_filter(const PixelBuffer<Tag, 3>& img, const BilateralConfig& cfg);

// Filters a gain map and re-pins the green gain to 1.
IlluminationMap apply_postfilter(const IlluminationMap& map, const BilateralConfig& cfg);

}  // namespace pwcc
