#include "pwcc/image.hpp"

namespace pwcc {

IlluminantChroma IlluminantChroma::from_rgb(double r, double g, double b) {
  if (!(r > 0.0) || !(g > 0.0) || !(b > 0.0) || !std::isfinite(r) ||
      !std::isfinite(g) || !std::isfinite(b)) {
    throw InvalidArgumentError("illuminant components must be finite and > 0");
  }
  IlluminantChroma out;
  out.rgb_ = {r / g, 1.0, b / g};
  return out;
}

namespace {

template <class Tag, int C, class Pred>
void check_pixels(const PixelBuffer<Tag, C>& buf, Pred ok, const char* what) {
  for (std::size_t i = 0; i < buf.pixel_count(); ++i) {
    for (double v : buf.pixel(i)) {
      if (!ok(v)) {
        throw InvalidInputError(std::string(what) + " at pixel index " +
                                std::to_string(i) + " (x=" +
                                std::to_string(i % buf.width()) + ", y=" +
                                std::to_string(i / buf.width()) + ")");
      }
    }
  }
}

}  // namespace

void validate(const LinearImage& img) {
  check_pixels(img, [](double v) { return std::isfinite(v) && v >= 0.0; },
               "image value not finite or negative");
}

void validate(const ChromaImage& chroma) {
  check_pixels(chroma, [](double v) { return std::isfinite(v); },
               "chroma value not finite");
}

void validate(const IlluminationMap& map) {
  check_pixels(map, [](double v) { return std::isfinite(v) && v > 0.0; },
               "gain not finite or not positive");
}

}  // namespace pwcc
