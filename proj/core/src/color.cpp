#include "pwcc/color.hpp"

#include <algorithm>
#include <cmath>

namespace pwcc {

namespace {

template <class Tag>
ChromaImage log_chroma_impl(const PixelBuffer<Tag, 3>& src, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw InvalidArgumentError("epsilon must be > 0");
  }
  ChromaImage out(src.width(), src.height());
  for (std::size_t i = 0; i < src.pixel_count(); ++i) {
    auto p = src.pixel(i);
    const double g = p[1] + epsilon;
    auto o = out.pixel(i);
    o[0] = std::log((p[0] + epsilon) / g);
    o[1] = std::log((p[2] + epsilon) / g);
  }
  return out;
}

}  // namespace

ChromaImage to_log_chroma(const LinearImage& img, double epsilon) {
  validate(img);
  return log_chroma_impl(img, epsilon);
}

ChromaImage to_log_chroma(const IlluminationMap& map, double epsilon) {
  validate(map);
  return log_chroma_impl(map, epsilon);
}

IlluminationMap from_log_chroma(const ChromaImage& chroma) {
  validate(chroma);
  IlluminationMap out(chroma.width(), chroma.height());
  for (std::size_t i = 0; i < chroma.pixel_count(); ++i) {
    auto c = chroma.pixel(i);
    auto o = out.pixel(i);
    o[0] = std::exp(c[0]);
    o[1] = 1.0;
    o[2] = std::exp(c[1]);
  }
  return out;
}

LinearImage apply_white_balance(const LinearImage& img, const IlluminationMap& map) {
  require_same_size(img, map, "apply_white_balance");
  LinearImage out(img.width(), img.height());
  auto& o = out.data();
  const auto& a = img.data();
  const auto& g = map.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = g[k] * a[k];
  return out;
}

IlluminationMap reciprocal(const IlluminationMap& map) {
  validate(map);
  IlluminationMap out(map.width(), map.height());
  auto& o = out.data();
  const auto& g = map.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = 1.0 / g[k];
  return out;
}

IlluminationMap g_normalized(const IlluminationMap& map) {
  validate(map);
  IlluminationMap out(map.width(), map.height());
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    auto p = map.pixel(i);
    auto o = out.pixel(i);
    o[0] = p[0] / p[1];
    o[1] = 1.0;
    o[2] = p[2] / p[1];
  }
  return out;
}

IlluminationMap constant_map(int width, int height, double e1, double e2, double e3) {
  IlluminationMap out(width, height);
  for (std::size_t i = 0; i < out.pixel_count(); ++i) {
    auto o = out.pixel(i);
    o[0] = e1;
    o[1] = e2;
    o[2] = e3;
  }
  return out;
}

template <class Tag, int C>
PixelBuffer<Tag, C> resize_bilinear(const PixelBuffer<Tag, C>& src, int new_w, int new_h) {
  if (new_w < 1 || new_h < 1) {
    throw InvalidArgumentError("resize target must be at least 1x1");
  }
  if (src.empty()) {
    throw InvalidArgumentError("cannot resize an empty buffer");
  }
  if (new_w == src.width() && new_h == src.height()) return src;

  const double sx = static_cast<double>(src.width()) / new_w;
  const double sy = static_cast<double>(src.height()) / new_h;
  PixelBuffer<Tag, C> out(new_w, new_h);
  for (int y = 0; y < new_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < new_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < C; ++c) {
        const double top = (1.0 - wx) * src.at(x0, y0, c) + wx * src.at(x1, y0, c);
        const double bot = (1.0 - wx) * src.at(x0, y1, c) + wx * src.at(x1, y1, c);
        out.at(x, y, c) = (1.0 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

template LinearImage resize_bilinear(const LinearImage&, int, int);
template ChromaImage resize_bilinear(const ChromaImage&, int, int);
template IlluminationMap resize_bilinear(const IlluminationMap&, int, int);
template AlphaMap resize_bilinear(const AlphaMap&, int, int);

double srgb_encode(double linear) {
  const double v = std::clamp(linear, 0.0, 1.0);
  if (v <= 0.0031308) return 12.92 * v;
  return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

}  // namespace pwcc
