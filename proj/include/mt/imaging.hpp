#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mt/error.hpp"

namespace mt {

inline constexpr int kMaxImageDimension = 16384;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

namespace detail {

inline void check_dimensions(int width, int height) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::DimensionBound,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  if (width > kMaxImageDimension || height > kMaxImageDimension)
    throw Error(ErrorCode::DimensionBound,
                std::to_string(width) + "x" + std::to_string(height) + " exceeds " +
                    std::to_string(kMaxImageDimension));
}

}  // namespace detail

/// 8-bit RGB raster, row-major, three bytes per pixel.
class Image {
 public:
  Image(int width, int height, Rgb fill = {})
      : width_(width), height_(height) {
    detail::check_dimensions(width, height);
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
      pixels_[i] = fill.r;
      pixels_[i + 1] = fill.g;
      pixels_[i + 2] = fill.b;
    }
  }

  Image(int width, int height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    detail::check_dimensions(width, height);
    if (pixels_.size() != static_cast<std::size_t>(width) * height * 3)
      throw Error(ErrorCode::DimensionMismatch,
                  "pixel buffer holds " + std::to_string(pixels_.size()) + " bytes, expected " +
                      std::to_string(static_cast<std::size_t>(width) * height * 3));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Rgb at(int x, int y) const noexcept {
    const auto* p = &pixels_[offset(x, y)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    auto* p = &pixels_[offset(x, y)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  std::span<const std::uint8_t> bytes() const noexcept { return pixels_; }
  std::span<std::uint8_t> bytes() noexcept { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// RGBA surface holding one makeup artifact before it is blended; A is coverage.
class Layer {
 public:
  Layer(int width, int height, Rgba fill = {}) : width_(width), height_(height) {
    detail::check_dimensions(width, height);
    texels_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  /// Fully transparent layer whose color channels already hold `color`, so
  /// blurring the layer only spreads coverage and never darkens the edges.
  static Layer transparent(int width, int height, Rgb color) {
    return Layer(width, height, Rgba{color.r, color.g, color.b, 0});
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  const Rgba& at(int x, int y) const noexcept { return texels_[index(x, y)]; }
  Rgba& at(int x, int y) noexcept { return texels_[index(x, y)]; }

  std::span<const Rgba> texels() const noexcept { return texels_; }
  std::span<Rgba> texels() noexcept { return texels_; }

  friend bool operator==(const Layer&, const Layer&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_;
  int height_;
  std::vector<Rgba> texels_;
};

/// Integer source-over with round-half-up:
/// out = floor((c*a + b*(255-a)) / 255 + 1/2).
constexpr std::uint8_t blend_channel(std::uint8_t base, std::uint8_t color,
                                     std::uint8_t alpha) noexcept {
  const unsigned sum = unsigned{color} * alpha + unsigned{base} * (255u - alpha);
  return static_cast<std::uint8_t>((2u * sum + 255u) / 510u);
}

inline Image composite(const Image& base, const Layer& layer) {
  if (base.width() != layer.width() || base.height() != layer.height())
    throw Error(ErrorCode::DimensionMismatch,
                "layer " + std::to_string(layer.width()) + "x" + std::to_string(layer.height()) +
                    " vs image " + std::to_string(base.width()) + "x" +
                    std::to_string(base.height()));
  Image out = base;
  for (int y = 0; y < base.height(); ++y) {
    for (int x = 0; x < base.width(); ++x) {
      const Rgba& t = layer.at(x, y);
      if (t.a == 0) continue;
      const Rgb b = base.at(x, y);
      out.set(x, y,
              {blend_channel(b.r, t.r, t.a), blend_channel(b.g, t.g, t.a),
               blend_channel(b.b, t.b, t.a)});
    }
  }
  return out;
}

}  // namespace mt
