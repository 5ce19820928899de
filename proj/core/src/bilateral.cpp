#include "pwcc/bilateral.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "pwcc/color.hpp"
#include "pwcc/parallel.hpp"

namespace pwcc {

void validate(const BilateralConfig& cfg) {
  if (!(cfg.sigma_s > 0.0) || !std::isfinite(cfg.sigma_s)) {
    throw InvalidArgumentError("bilateral sigma_s must be > 0");
  }
  if (!(cfg.sigma_r > 0.0) || !std::isfinite(cfg.sigma_r)) {
    throw InvalidArgumentError("bilateral sigma_r must be > 0");
  }
  if (cfg.diameter < 1 || cfg.diameter % 2 == 0) {
    throw InvalidArgumentError("bilateral diameter must be odd and >= 1, got " +
                               std::to_string(cfg.diameter));
  }
}

template <class Tag>
PixelBuffer<Tag, 3> bilateral_filter(const PixelBuffer<Tag, 3>& img, const BilateralConfig& cfg) {
  validate(cfg);
  if (!all_finite(img)) throw InvalidInputError("bilateral_filter: non-finite input");
  const int w = img.width();
  const int h = img.height();
  const int r = cfg.diameter / 2;
  const int d = cfg.diameter;

  std::vector<double> spatial(static_cast<std::size_t>(d) * d);
  const double ks = -0.5 / (cfg.sigma_s * cfg.sigma_s);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      spatial[static_cast<std::size_t>((dy + r) * d + dx + r)] = std::exp(ks * (dx * dx + dy * dy));
    }
  }
  const double kr = -0.5 / (cfg.sigma_r * cfg.sigma_r);

  PixelBuffer<Tag, 3> out(w, h);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
      const auto p = img.pixel(x, y);
      double acc[3] = {0.0, 0.0, 0.0};
      double norm[3] = {0.0, 0.0, 0.0};
      for (int qy = y0; qy <= y1; ++qy) {
        const double* srow = spatial.data() + static_cast<std::size_t>((qy - y + r) * d + r);
        for (int qx = x0; qx <= x1; ++qx) {
          const auto q = img.pixel(qx, qy);
          const double ws = srow[qx - x];
          if (cfg.mode == RangeMode::kJoint) {
            const double d0 = p[0] - q[0], d1 = p[1] - q[1], d2 = p[2] - q[2];
            const double wgt = ws * std::exp(kr * (d0 * d0 + d1 * d1 + d2 * d2));
            for (int c = 0; c < 3; ++c) {
              acc[c] += wgt * q[c];
              norm[c] += wgt;
            }
          } else {
            for (int c = 0; c < 3; ++c) {
              const double dc = p[c] - q[c];
              const double wgt = ws * std::exp(kr * dc * dc);
              acc[c] += wgt * q[c];
              norm[c] += wgt;
            }
          }
        }
      }
      auto o = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) o[c] = acc[c] / norm[c];
    }
  });
  return out;
}

template LinearImage bilateral_filter(const LinearImage&, const BilateralConfig&);
template IlluminationMap bilateral_filter(const IlluminationMap&, const BilateralConfig&);

IlluminationMap apply_postfilter(const IlluminationMap& map, const BilateralConfig& cfg) {
  validate(map);
  return g_normalized(bilateral_filter(map, cfg));
}

}  // namespace pwcc
