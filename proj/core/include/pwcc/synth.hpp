#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "pwcc/image.hpp"
#include "pwcc/rng.hpp"

namespace pwcc {

struct ConstantAlpha {
  double value = 1.0;
};

enum class Axis { kX, kY };

// 0 on the first border, 1 on the opposite one (reversed swaps them).
struct LinearGradientAlpha {
  Axis axis = Axis::kX;
  bool reversed = false;
};

// alpha = clamp(1 - d / (radius * max(w, h)), 0, 1), d measured from
// (cx * w, cy * h) to the pixel centre. cx, cy, radius are fractions.
struct RadialAlpha {
  double cx = 0.5;
  double cy = 0.5;
  double radius = 0.5;
};

// Two sites drawn from the seed; alpha = 1 in the cell of the first site.
struct Voronoi2Alpha {};

using AlphaKind = std::variant<ConstantAlpha, LinearGradientAlpha, RadialAlpha, Voronoi2Alpha>;

// Accepted names: "constant", "linear-gradient", "radial", "voronoi-2".
// Anything else is a ConfigError.
enum class AlphaFamily { kConstant, kLinearGradient, kRadial, kVoronoi2 };
AlphaFamily parse_alpha_family(std::string_view name);
std::string_view to_string(AlphaFamily family);

// Draws family parameters from rng (used by the dataset generator).
AlphaKind sample_alpha_kind(AlphaFamily family, Rng& rng);

AlphaMap make_alpha_map(const AlphaKind& kind, int width, int height, std::uint64_t seed);

struct SceneSample {
  LinearImage input;
  LinearImage gt_image;
  IlluminationMap gt_map;
  AlphaMap alpha;
  IlluminantChroma illum_a;
  IlluminantChroma illum_b;
  std::uint64_t seed = 0;
};

// gt_map = alpha * l_a + (1 - alpha) * l_b (green-normalized per pixel),
// input = gt_map (.) base.
SceneSample synthesize(const LinearImage& base, const IlluminantChroma& l_a,
                       const IlluminantChroma& l_b, const AlphaMap& alpha,
                       std::uint64_t seed = 0);

// Mixes two illuminants with an alpha field; shared by synthesize and the
// training-time label smoothing.
IlluminationMap mix_illuminants(const IlluminantChroma& l_a, const IlluminantChroma& l_b,
                                const AlphaMap& alpha);

// Label smoothing: alpha + N(0, (alpha / w_n)^2), clamped to [0, 1].
AlphaMap smooth_alpha(const AlphaMap& alpha, double w_n, std::uint64_t seed);

// Procedural reflectance: a textured background and 3-8 flat patches, all
// drawn from a fixed palette of 24 material colours, under an achromatic
// shading ramp. Values lie in [0.01, 1].
LinearImage procedural_base(int width, int height, Rng& rng);

}  // namespace pwcc
