#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pwcc/image.hpp"

namespace pwcc {

// 16-bit linear PNG. Samples are stored as round(clamp(v, 0, 1) * 65535) and
// decoded as v_int / 65535. Gray inputs are replicated to RGB and alpha is
// dropped; any bit depth other than 16 is rejected.
LinearImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const LinearImage& img);

// 8-bit sRGB-encoded preview for human viewing. Never read back.
void write_preview_png(const std::filesystem::path& path, const LinearImage& img);

std::uint16_t quantize16(double v);

// Raw float payload of a "PWCC" file.
//
// Layout (all little-endian):
//   "PWCC" | u32 width | u32 height | u32 channels | f32[width*height*channels]
// The payload is row-major with channels interleaved.
struct FloatMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::vector<float> data;

  bool operator==(const FloatMap&) const = default;
};

FloatMap read_float_map(const std::filesystem::path& path);
void write_float_map(const std::filesystem::path& path, const FloatMap& map);

std::vector<std::uint8_t> encode_float_map(const FloatMap& map);
FloatMap decode_float_map(const std::vector<std::uint8_t>& bytes);

// Conversions between typed buffers and the on-disk payload. Narrowing to
// f32 happens here.
template <class Tag, int C>
FloatMap to_float_map(const PixelBuffer<Tag, C>& buf);

// Throws FormatError when the stored channel count is not C.
template <class Tag, int C>
PixelBuffer<Tag, C> from_float_map(const FloatMap& map);

IlluminationMap read_illumination_map(const std::filesystem::path& path);
AlphaMap read_alpha_map(const std::filesystem::path& path);

}  // namespace pwcc
