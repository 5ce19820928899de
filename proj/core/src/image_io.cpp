#include "pwcc/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <csetjmp>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "pwcc/color.hpp"

namespace pwcc {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through a callback that must not return. The message
// is stashed and control goes back to the setjmp point in the caller.
struct PngErrorState {
  char message[256] = {0};
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  if (state) std::snprintf(state->message, sizeof state->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

FilePtr open_for_read(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw FileNotFoundError("no such file: " + path.string());
  }
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open for reading: " + path.string());
  return f;
}

FilePtr open_for_write(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open for writing: " + path.string());
  return f;
}

// Writes an RGB PNG from already-packed rows; bit_depth is 8 or 16 and 16-bit
// samples are given in host order.
void write_png_rows(const std::filesystem::path& path, int width, int height,
                    int bit_depth, const std::vector<std::uint8_t>& packed) {
  FilePtr f = open_for_write(path);
  PngErrorState err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err,
                                            png_error_fn, png_warning_fn);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  const std::size_t stride = static_cast<std::size_t>(width) * 3 * (bit_depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(packed.data() + stride * y);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed for " + path.string() + ": " + err.message);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  // Fixed compression settings keep reruns byte-identical.
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  if (bit_depth == 16 && std::endian::native == std::endian::little) {
    png_set_swap(png);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(f.get()) != 0) {
    throw IoError("write failed: " + path.string());
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

constexpr char kFloatMapMagic[4] = {'P', 'W', 'C', 'C'};
constexpr std::size_t kFloatMapHeader = 16;

}  // namespace

std::uint16_t quantize16(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(c * 65535.0));
}

LinearImage read_image(const std::filesystem::path& path) {
  FilePtr f = open_for_read(path);
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string());
  }
  PngErrorState err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           png_error_fn, png_warning_fn);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  // Declared before setjmp so the longjmp target never skips their
  // construction.
  std::vector<std::uint8_t> raw;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("malformed PNG " + path.string() + ": " + err.message);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr,
               nullptr, nullptr);
  if (bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedBitDepthError("expected a 16-bit PNG, got bit depth " +
                                   std::to_string(bit_depth) + ": " + path.string());
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("palette PNGs are not supported: " + path.string());
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  if (stride != static_cast<std::size_t>(width) * 6) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unexpected PNG row layout: " + path.string());
  }
  raw.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  LinearImage img(static_cast<int>(width), static_cast<int>(height));
  auto& d = img.data();
  for (std::size_t k = 0; k < d.size(); ++k) {
    std::uint16_t s;
    std::memcpy(&s, raw.data() + 2 * k, 2);
    d[k] = s / 65535.0;
  }
  return img;
}

void write_image(const std::filesystem::path& path, const LinearImage& img) {
  if (img.empty()) throw InvalidArgumentError("cannot write an empty image");
  std::vector<std::uint8_t> packed(img.data().size() * 2);
  for (std::size_t k = 0; k < img.data().size(); ++k) {
    const std::uint16_t s = quantize16(img.data()[k]);
    std::memcpy(packed.data() + 2 * k, &s, 2);
  }
  write_png_rows(path, img.width(), img.height(), 16, packed);
}

void write_preview_png(const std::filesystem::path& path, const LinearImage& img) {
  if (img.empty()) throw InvalidArgumentError("cannot write an empty image");
  std::vector<std::uint8_t> packed(img.data().size());
  for (std::size_t k = 0; k < packed.size(); ++k) {
    packed[k] = static_cast<std::uint8_t>(std::lround(srgb_encode(img.data()[k]) * 255.0));
  }
  write_png_rows(path, img.width(), img.height(), 8, packed);
}

std::vector<std::uint8_t> encode_float_map(const FloatMap& map) {
  if (map.channels < 1 || map.channels > 3) {
    throw UnsupportedChannelCountError("float map channel count must be 1, 2 or 3");
  }
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height * map.channels;
  if (map.data.size() != n) throw ShapeError("float map payload size mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(kFloatMapHeader + 4 * n);
  out.insert(out.end(), std::begin(kFloatMapMagic), std::end(kFloatMapMagic));
  put_u32(out, map.width);
  put_u32(out, map.height);
  put_u32(out, map.channels);
  for (float v : map.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FloatMap decode_float_map(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kFloatMapMagic, 4) != 0) {
    throw BadMagicError("float map: bad magic");
  }
  if (bytes.size() < kFloatMapHeader) throw TruncatedError("float map: truncated header");
  FloatMap map;
  map.width = get_u32(bytes.data() + 4);
  map.height = get_u32(bytes.data() + 8);
  map.channels = get_u32(bytes.data() + 12);
  if (map.channels < 1 || map.channels > 3) {
    throw UnsupportedChannelCountError("float map: channel count " + std::to_string(map.channels) +
                                       " outside {1, 2, 3}");
  }
  const std::uint64_t n = static_cast<std::uint64_t>(map.width) * map.height * map.channels;
  if (bytes.size() - kFloatMapHeader < n * 4) {
    throw TruncatedError("float map: truncated payload");
  }
  map.data.resize(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < map.data.size(); ++k) {
    map.data[k] = std::bit_cast<float>(get_u32(bytes.data() + kFloatMapHeader + 4 * k));
  }
  return map;
}

FloatMap read_float_map(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw FileNotFoundError("no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_float_map(bytes);
}

void write_float_map(const std::filesystem::path& path, const FloatMap& map) {
  const auto bytes = encode_float_map(map);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

template <class Tag, int C>
FloatMap to_float_map(const PixelBuffer<Tag, C>& buf) {
  FloatMap map;
  map.width = static_cast<std::uint32_t>(buf.width());
  map.height = static_cast<std::uint32_t>(buf.height());
  map.channels = C;
  map.data.assign(buf.data().begin(), buf.data().end());
  return map;
}

template <class Tag, int C>
PixelBuffer<Tag, C> from_float_map(const FloatMap& map) {
  if (map.channels != static_cast<std::uint32_t>(C)) {
    throw FormatError("expected a " + std::to_string(C) + "-channel map, got " +
                      std::to_string(map.channels));
  }
  std::vector<double> data(map.data.begin(), map.data.end());
  return PixelBuffer<Tag, C>(static_cast<int>(map.width), static_cast<int>(map.height),
                             std::move(data));
}

template FloatMap to_float_map(const LinearImage&);
template FloatMap to_float_map(const ChromaImage&);
template FloatMap to_float_map(const IlluminationMap&);
template FloatMap to_float_map(const AlphaMap&);
template LinearImage from_float_map(const FloatMap&);
template ChromaImage from_float_map(const FloatMap&);
template IlluminationMap from_float_map(const FloatMap&);
template AlphaMap from_float_map(const FloatMap&);

IlluminationMap read_illumination_map(const std::filesystem::path& path) {
  return from_float_map<IlluminationTag, 3>(read_float_map(path));
}

AlphaMap read_alpha_map(const std::filesystem::path& path) {
  return from_float_map<AlphaTag, 1>(read_float_map(path));
}

}  // namespace pwcc
