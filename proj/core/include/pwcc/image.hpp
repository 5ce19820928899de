#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pwcc/error.hpp"

namespace pwcc {

// Row-major, channel-interleaved H x W x C buffer of doubles. The Tag keeps
// images, gain maps and chroma maps from being mixed up at compile time.
template <class Tag, int C>
class PixelBuffer {
 public:
  static constexpr int kChannels = C;

  PixelBuffer() = default;

  PixelBuffer(int width, int height, double fill = 0.0)
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw InvalidArgumentError("negative buffer dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * height * C, fill);
  }

  PixelBuffer(int width, int height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0) {
      throw InvalidArgumentError("negative buffer dimensions");
    }
    if (data_.size() != static_cast<std::size_t>(width) * height * C) {
      throw ShapeError("buffer payload does not match " + std::to_string(width) +
                       "x" + std::to_string(height) + "x" + std::to_string(C));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<double, C> pixel(int x, int y) {
    return std::span<double, C>(data_.data() + index(x, y, 0), C);
  }
  std::span<const double, C> pixel(int x, int y) const {
    return std::span<const double, C>(data_.data() + index(x, y, 0), C);
  }
  std::span<double, C> pixel(std::size_t i) {
    return std::span<double, C>(data_.data() + i * C, C);
  }
  std::span<const double, C> pixel(std::size_t i) const {
    return std::span<const double, C>(data_.data() + i * C, C);
  }

  std::vector<double>& data() & { return data_; }
  const std::vector<double>& data() const& { return data_; }
  // Moves out of a temporary so `for (v : f().data())` cannot dangle.
  std::vector<double> data() && { return std::move(data_); }

  bool same_shape(const PixelBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  template <class OtherTag, int OC>
  bool same_size(const PixelBuffer<OtherTag, OC>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const PixelBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * C + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

struct LinearTag {};
struct ChromaTag {};
struct IlluminationTag {};
struct AlphaTag {};

// Linear-light RGB intensities, nominally in [0, 1].
using LinearImage = PixelBuffer<LinearTag, 3>;
// Per-pixel (u, v) = (ln R/G, ln B/G).
using ChromaImage = PixelBuffer<ChromaTag, 2>;
// Per-pixel diagonal gains (e1, e2, e3).
using IlluminationMap = PixelBuffer<IlluminationTag, 3>;
// Per-pixel weight of illuminant a.
using AlphaMap = PixelBuffer<AlphaTag, 1>;

// Chromaticity of one light source, stored with g == 1.
class IlluminantChroma {
 public:
  IlluminantChroma() = default;

  // Normalizes by the green component; all components must be > 0.
  static IlluminantChroma from_rgb(double r, double g, double b);

  const std::array<double, 3>& rgb() const { return rgb_; }
  double operator[](int c) const { return rgb_[static_cast<std::size_t>(c)]; }

  bool operator==(const IlluminantChroma&) const = default;

 private:
  std::array<double, 3> rgb_{1.0, 1.0, 1.0};
};

template <class Tag, int C>
bool all_finite(const PixelBuffer<Tag, C>& buf) {
  for (double v : buf.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// Throws InvalidInputError naming the first pixel that breaks the invariant.
void validate(const LinearImage& img);
void validate(const ChromaImage& chroma);
void validate(const IlluminationMap& map);

template <class A, class B>
void require_same_size(const A& a, const B& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " +
                     std::to_string(b.width()) + "x" +
                     std::to_string(b.height()));
  }
}

}  // namespace pwcc
