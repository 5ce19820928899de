#pragma once

#include "pwcc/image.hpp"

namespace pwcc {

inline constexpr double kDefaultEpsilon = 1e-6;

// u = ln((R+eps)/(G+eps)), v = ln((B+eps)/(G+eps)).
ChromaImage to_log_chroma(const LinearImage& img, double epsilon = kDefaultEpsilon);
ChromaImage to_log_chroma(const IlluminationMap& map, double epsilon = kDefaultEpsilon);

// Gains (exp u, 1, exp v). The absolute scale is unrecoverable from (u, v),
// so the green gain is pinned to 1.
IlluminationMap from_log_chroma(const ChromaImage& chroma);

// Element-wise von Kries: out_c = gain_c * in_c. No clamping.
LinearImage apply_white_balance(const LinearImage& img, const IlluminationMap& map);

// Per-pixel 1 / gain, used to turn an illuminant map into correcting gains
// and back.
IlluminationMap reciprocal(const IlluminationMap& map);

// Divides every pixel by its own green gain.
IlluminationMap g_normalized(const IlluminationMap& map);

// Bilinear resampling with half-pixel-centred sample positions and edge
// clamping. Same-size requests return an exact copy.
template <class Tag, int C>
PixelBuffer<Tag, C> resize_bilinear(const PixelBuffer<Tag, C>& src, int new_w, int new_h);

// Convenience: whole-map constant fill.
IlluminationMap constant_map(int width, int height, double e1, double e2, double e3);

// IEC 61966-2-1 transfer function, used only for 8-bit preview output.
double srgb_encode(double linear);

}  // namespace pwcc
