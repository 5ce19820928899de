#include "pwcc/synth.hpp"

#include "pwcc/color.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace pwcc {

AlphaFamily parse_alpha_family(std::string_view name) {
  if (name == "constant") return AlphaFamily::kConstant;
  if (name == "linear-gradient") return AlphaFamily::kLinearGradient;
  if (name == "radial") return AlphaFamily::kRadial;
  if (name == "voronoi-2") return AlphaFamily::kVoronoi2;
  throw ConfigError("unknown alpha kind '" + std::string(name) + "'");
}

std::string_view to_string(AlphaFamily family) {
  switch (family) {
    case AlphaFamily::kConstant: return "constant";
    case AlphaFamily::kLinearGradient: return "linear-gradient";
    case AlphaFamily::kRadial: return "radial";
    case AlphaFamily::kVoronoi2: return "voronoi-2";
  }
  return "?";
}

AlphaKind sample_alpha_kind(AlphaFamily family, Rng& rng) {
  switch (family) {
    case AlphaFamily::kConstant:
      return ConstantAlpha{rng.uniform()};
    case AlphaFamily::kLinearGradient: {
      LinearGradientAlpha g;
      g.axis = rng.uniform() < 0.5 ? Axis::kX : Axis::kY;
      g.reversed = rng.uniform() < 0.5;
      return g;
    }
    case AlphaFamily::kRadial: {
      RadialAlpha r;
      r.cx = rng.uniform(0.2, 0.8);
      r.cy = rng.uniform(0.2, 0.8);
      r.radius = rng.uniform(0.3, 0.9);
      return r;
    }
    case AlphaFamily::kVoronoi2:
      return Voronoi2Alpha{};
  }
  throw ConfigError("unknown alpha family");
}

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

struct AlphaPainter {
  int w;
  int h;
  std::uint64_t seed;

  AlphaMap operator()(const ConstantAlpha& k) const {
    if (!in_unit(k.value)) throw InvalidArgumentError("constant alpha outside [0, 1]");
    return AlphaMap(w, h, k.value);
  }

  AlphaMap operator()(const LinearGradientAlpha& k) const {
    AlphaMap a(w, h);
    const int n = k.axis == Axis::kX ? w : h;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int i = k.axis == Axis::kX ? x : y;
        double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        if (k.reversed) t = 1.0 - t;
        a.at(x, y, 0) = t;
      }
    }
    return a;
  }

  AlphaMap operator()(const RadialAlpha& k) const {
    if (!in_unit(k.cx) || !in_unit(k.cy) || !in_unit(k.radius) || k.radius <= 0.0) {
      throw InvalidArgumentError("radial alpha parameters must lie in [0, 1], radius > 0");
    }
    AlphaMap a(w, h);
    const double cx = k.cx * w;
    const double cy = k.cy * h;
    const double r = k.radius * std::max(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
        a.at(x, y, 0) = std::clamp(1.0 - d / r, 0.0, 1.0);
      }
    }
    return a;
  }

  AlphaMap operator()(const Voronoi2Alpha&) const {
    Rng rng(seed);
    const double ax = rng.uniform(0.0, w), ay = rng.uniform(0.0, h);
    const double bx = rng.uniform(0.0, w), by = rng.uniform(0.0, h);
    AlphaMap a(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double da = (px - ax) * (px - ax) + (py - ay) * (py - ay);
        const double db = (px - bx) * (px - bx) + (py - by) * (py - by);
        a.at(x, y, 0) = da <= db ? 1.0 : 0.0;
      }
    }
    return a;
  }
};

}  // namespace

AlphaMap make_alpha_map(const AlphaKind& kind, int width, int height, std::uint64_t seed) {
  if (width < 1 || height < 1) throw InvalidArgumentError("alpha map must be at least 1x1");
  return std::visit(AlphaPainter{width, height, seed}, kind);
}

IlluminationMap mix_illuminants(const IlluminantChroma& l_a, const IlluminantChroma& l_b,
                                const AlphaMap& alpha) {
  IlluminationMap map(alpha.width(), alpha.height());
  for (std::size_t i = 0; i < alpha.pixel_count(); ++i) {
    const double a = alpha.pixel(i)[0];
    auto m = map.pixel(i);
    for (int c = 0; c < 3; ++c) m[c] = a * l_a[c] + (1.0 - a) * l_b[c];
    // Both endpoints have g == 1, so this only removes rounding drift.
    const double g = m[1];
    m[0] /= g;
    m[1] = 1.0;
    m[2] /= g;
  }
  return map;
}

SceneSample synthesize(const LinearImage& base, const IlluminantChroma& l_a,
                       const IlluminantChroma& l_b, const AlphaMap& alpha,
                       std::uint64_t seed) {
  require_same_size(base, alpha, "synthesize");
  for (int c = 0; c < 3; ++c) {
    if (!(l_a[c] > 0.0) || !(l_b[c] > 0.0)) {
      throw InvalidArgumentError("illuminant components must be > 0");
    }
  }
  for (double a : alpha.data()) {
    if (!in_unit(a)) throw InvalidArgumentError("alpha outside [0, 1]");
  }
  validate(base);
  SceneSample s;
  s.gt_map = mix_illuminants(l_a, l_b, alpha);
  s.input = apply_white_balance(base, s.gt_map);
  s.gt_image = base;
  s.alpha = alpha;
  s.illum_a = l_a;
  s.illum_b = l_b;
  s.seed = seed;
  return s;
}

AlphaMap smooth_alpha(const AlphaMap& alpha, double w_n, std::uint64_t seed) {
  if (!(w_n > 0.0) || !std::isfinite(w_n)) {
    throw InvalidArgumentError("smoothing constant w_n must be > 0");
  }
  Rng rng(seed);
  AlphaMap out(alpha.width(), alpha.height());
  auto& o = out.data();
  const auto& a = alpha.data();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double sigma = a[k] / w_n;
    // Draw unconditionally so the stream position does not depend on alpha.
    const double z = rng.normal();
    o[k] = std::clamp(a[k] + sigma * z, 0.0, 1.0);
  }
  return out;
}

namespace {

// Bilinearly interpolated lattice noise with the given cell size.
std::vector<double> value_noise(int w, int h, double cell, Rng& rng) {
  const int gw = static_cast<int>(std::ceil(w / cell)) + 2;
  const int gh = static_cast<int>(std::ceil(h / cell)) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (auto& v : lattice) v = rng.uniform();
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const double fy = (y + 0.5) / cell;
    const int y0 = static_cast<int>(fy);
    const double ty = fy - y0;
    const double sy = ty * ty * (3.0 - 2.0 * ty);
    for (int x = 0; x < w; ++x) {
      const double fx = (x + 0.5) / cell;
      const int x0 = static_cast<int>(fx);
      const double tx = fx - x0;
      const double sx = tx * tx * (3.0 - 2.0 * tx);
      auto L = [&](int i, int j) { return lattice[static_cast<std::size_t>(j) * gw + i]; };
      const double top = (1 - sx) * L(x0, y0) + sx * L(x0 + 1, y0);
      const double bot = (1 - sx) * L(x0, y0 + 1) + sx * L(x0 + 1, y0 + 1);
      out[static_cast<std::size_t>(y) * w + x] = (1 - sy) * top + sy * bot;
    }
  }
  return out;
}

}  // namespace

namespace {

// sRGB-encoded 8-bit values of the 24 classic ColorChecker patches, used as
// the material palette.
constexpr std::array<std::array<int, 3>, 24> kPalette8 = {{
    {115, 82, 68},   {194, 150, 130}, {98, 122, 157},  {87, 108, 67},   {133, 128, 177},
    {103, 189, 170}, {214, 126, 44},  {80, 91, 166},   {193, 90, 99},   {94, 60, 108},
    {157, 188, 64},  {224, 163, 46},  {56, 61, 150},   {70, 148, 73},   {175, 54, 60},
    {231, 199, 31},  {187, 86, 149},  {8, 133, 161},   {243, 243, 242}, {200, 200, 200},
    {160, 160, 160}, {122, 122, 121}, {85, 85, 85},    {52, 52, 52},
}};

double srgb_decode(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

// A palette reflectance with mild per-channel jitter.
std::array<double, 3> draw_material(Rng& rng) {
  const auto& p = kPalette8[rng.index(kPalette8.size())];
  std::array<double, 3> out;
  for (int c = 0; c < 3; ++c) out[c] = srgb_decode(p[c] / 255.0) * rng.uniform(0.95, 1.05);
  return out;
}

}  // namespace

LinearImage procedural_base(int width, int height, Rng& rng) {
  if (width < 1 || height < 1) throw InvalidArgumentError("base image must be at least 1x1");
  LinearImage img(width, height);
  const double span = std::max(width, height);

  // Background material with achromatic multi-scale texture.
  const auto background = draw_material(rng);
  const double cells[3] = {span / 2.0, span / 5.0, span / 12.0};
  const double weights[3] = {0.5, 0.3, 0.2};
  std::vector<double> texture(img.pixel_count(), 0.0);
  for (int o = 0; o < 3; ++o) {
    const auto layer = value_noise(width, height, std::max(1.0, cells[o]), rng);
    for (std::size_t i = 0; i < texture.size(); ++i) texture[i] += weights[o] * layer[i];
  }
  for (std::size_t i = 0; i < texture.size(); ++i) {
    const double t = 0.7 + 0.6 * texture[i];
    for (int c = 0; c < 3; ++c) img.pixel(i)[c] = background[static_cast<std::size_t>(c)] * t;
  }

  // Flat material patches (rectangles and discs).
  const int patches = 3 + static_cast<int>(rng.index(6));
  for (int p = 0; p < patches; ++p) {
    const auto color = draw_material(rng);
    const bool disc = rng.uniform() < 0.5;
    const double cx = rng.uniform(0.0, width), cy = rng.uniform(0.0, height);
    const double rx = rng.uniform(0.08, 0.3) * span, ry = rng.uniform(0.08, 0.3) * span;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
        const bool inside = disc ? dx * dx + dy * dy <= 1.0
                                 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[static_cast<std::size_t>(c)];
      }
    }
  }

  // Achromatic shading ramp.
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double lo = rng.uniform(0.5, 0.9);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double t = 0.5 + ((x + 0.5) / width - 0.5) * ca + ((y + 0.5) / height - 0.5) * sa;
      const double shade = lo + (1.0 - lo) * std::clamp(t, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = std::clamp(img.at(x, y, c) * shade, 0.01, 1.0);
      }
    }
  }
  return img;
}

}  // namespace pwcc
