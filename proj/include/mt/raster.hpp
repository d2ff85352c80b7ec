#pragma once

// Deterministic software rasterization onto RGBA layers: even-odd polygon
// fill sampled at texel centers, a convex fast path, and separable Gaussian
// blur with reflect-101 borders.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mt/error.hpp"
#include "mt/geometry.hpp"
#include "mt/imaging.hpp"
#include "mt/log.hpp"

namespace mt {

/// Even-odd crossing test with a ray towards +x. Edges are half-open in y so
/// a vertex on the ray is counted once.
inline bool point_in_polygon(Point p, const Polygon& poly) {
  bool inside = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y) &&
        p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x)
      inside = !inside;
  }
  return inside;
}

namespace raster_detail {

inline std::size_t distinct_vertices(const Polygon& poly) {
  std::vector<Point> seen;
  for (const auto& p : poly.vertices)
    if (std::find(seen.begin(), seen.end(), p) == seen.end()) seen.push_back(p);
  return seen.size();
}

inline bool usable(const Polygon& poly) {
  for (const auto& p : poly.vertices)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  if (distinct_vertices(poly) >= 3) return true;
  log::warn("DegeneratePolygon: fewer than 3 distinct vertices, nothing filled");
  return false;
}

// X positions where the polygon boundary crosses the horizontal line at y,
// computed exactly as point_in_polygon does.
inline void crossings(const Polygon& poly, double y, std::vector<double>& xs) {
  xs.clear();
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > y) != (v[j].y > y))
      xs.push_back((v[j].x - v[i].x) * (y - v[i].y) / (v[j].y - v[i].y) + v[i].x);
  }
}

// Texels whose centers satisfy x0 <= cx < x1.
inline void fill_span(Layer& layer, int row, double x0, double x1, Rgba texel) {
  const double first = std::ceil(x0 - 0.5);
  const double last = std::ceil(x1 - 0.5) - 1.0;
  const int begin = static_cast<int>(std::max(first, 0.0));
  const int end = static_cast<int>(std::min(last, static_cast<double>(layer.width() - 1)));
  for (int x = begin; x <= end; ++x) layer.at(x, row) = texel;
}

inline std::pair<int, int> row_range(const Polygon& poly, int height) {
  const BoundingBox box = bounding_box(poly);
  const int first = static_cast<int>(std::max(0.0, std::floor(box.min_y - 0.5)));
  const int last = static_cast<int>(std::min<double>(height - 1, std::ceil(box.max_y)));
  return {first, last};
}

}  // namespace raster_detail

/// Sets every texel whose center lies inside `poly` (even-odd rule) to
/// (color, alpha). Degenerate polygons leave the layer untouched.
inline Layer fill_polygon(Layer layer, const Polygon& poly, Rgb color, std::uint8_t alpha) {
  if (!raster_detail::usable(poly)) return layer;
  const Rgba texel{color.r, color.g, color.b, alpha};
  const auto [first, last] = raster_detail::row_range(poly, layer.height());
  std::vector<double> xs;
  for (int row = first; row <= last; ++row) {
    raster_detail::crossings(poly, row + 0.5, xs);
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2)
      raster_detail::fill_span(layer, row, xs[k], xs[k + 1], texel);
  }
  return layer;
}

/// Convexity by consistent cross-product sign (tolerance 1e-9) plus a total
/// turning of one full revolution, which rules out star polygons.
inline bool is_convex(const Polygon& poly, double tolerance = 1e-9) {
  std::vector<Point> edges;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point e = v[(i + 1) % v.size()] - v[i];
    if (e.x != 0.0 || e.y != 0.0) edges.push_back(e);
  }
  if (edges.size() < 3) return true;
  bool pos = false, neg = false;
  double turning = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Point a = edges[i], b = edges[(i + 1) % edges.size()];
    const double c = cross(a, b);
    if (c > tolerance) pos = true;
    if (c < -tolerance) neg = true;
    turning += std::atan2(c, a.x * b.x + a.y * b.y);
  }
  if (pos && neg) return false;
  return std::abs(std::abs(turning) - 2.0 * std::numbers::pi) < 1e-6;
}

/// Convex fast path: one span per row between the outermost crossings.
inline Layer fill_convex_polygon(Layer layer, const Polygon& poly, Rgb color, std::uint8_t alpha) {
  if (!raster_detail::usable(poly)) return layer;
  if (!is_convex(poly)) throw Error(ErrorCode::NotConvex, "polygon fails the convexity test");
  const Rgba texel{color.r, color.g, color.b, alpha};
  const auto [first, last] = raster_detail::row_range(poly, layer.height());
  std::vector<double> xs;
  for (int row = first; row <= last; ++row) {
    raster_detail::crossings(poly, row + 0.5, xs);
    if (xs.size() < 2) continue;
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    raster_detail::fill_span(layer, row, *lo, *hi, texel);
  }
  return layer;
}

/// Normalized Gaussian taps, radius ceil(3 sigma). sigma == 0 is the unit
/// impulse.
class Kernel1D {
 public:
  explicit Kernel1D(double sigma) : sigma_(sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
      throw Error(ErrorCode::NegativeSigma, "sigma " + std::to_string(sigma));
    radius_ = static_cast<int>(std::ceil(3.0 * sigma));
    weights_.assign(2 * radius_ + 1, 0.0);
    if (radius_ == 0) {
      weights_[0] = 1.0;
      return;
    }
    double sum = 0.0;
    for (int i = -radius_; i <= radius_; ++i) {
      const double w = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
      weights_[i + radius_] = w;
      sum += w;
    }
    for (auto& w : weights_) w /= sum;
  }

  double sigma() const noexcept { return sigma_; }
  int radius() const noexcept { return radius_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double operator[](int offset) const noexcept { return weights_[offset + radius_]; }

 private:
  double sigma_;
  int radius_ = 0;
  std::vector<double> weights_;
};

/// Reflect-101 border index: -1 -> 1, n -> n-2.
inline int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

inline std::uint8_t round_channel(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

/// Separable convolution of all four channels, horizontal then vertical.
/// The intermediate pass stays in double precision. Symmetric taps are
/// summed in pairs so mirrored inputs give mirrored outputs bit for bit.
///
/// Only the window within `radius` of texels that differ from texel (0,0) is
/// convolved; everywhere else the neighbourhood is constant and normalized
/// taps reproduce the input value exactly after rounding.
inline Layer gaussian_blur(const Layer& layer, double sigma) {
  const Kernel1D kernel(sigma);
  if (kernel.radius() == 0) return layer;
  const int w = layer.width(), h = layer.height(), r = kernel.radius();

  const Rgba background = layer.at(0, 0);
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (layer.at(x, y) != background) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
  Layer out(w, h, background);
  if (x1 < 0) return out;
  x0 = std::max(0, x0 - r);
  x1 = std::min(w - 1, x1 + r);
  y0 = std::max(0, y0 - r);
  y1 = std::min(h - 1, y1 + r);
  // Rows the vertical pass can reach from inside the window.
  const int ry0 = std::max(0, y0 - r), ry1 = std::min(h - 1, y1 + r);
  const int tw = x1 - x0 + 1;

  auto channel = [](const Rgba& t, int c) -> double {
    switch (c) {
      case 0: return t.r;
      case 1: return t.g;
      case 2: return t.b;
      default: return t.a;
    }
  };

  std::vector<double> tmp(static_cast<std::size_t>(tw) * (ry1 - ry0 + 1) * 4);
  auto slot = [&](int x, int y, int c) -> double& {
    return tmp[(static_cast<std::size_t>(y - ry0) * tw + (x - x0)) * 4 + c];
  };

  for (int y = ry0; y <= ry1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      for (int c = 0; c < 4; ++c) {
        double acc = kernel[0] * channel(layer.at(x, y), c);
        for (int k = 1; k <= r; ++k)
          acc += kernel[k] * (channel(layer.at(reflect101(x - k, w), y), c) +
                              channel(layer.at(reflect101(x + k, w), y), c));
        slot(x, y, c) = acc;
      }
    }
  }

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double acc[4];
      for (int c = 0; c < 4; ++c) {
        acc[c] = kernel[0] * slot(x, y, c);
        for (int k = 1; k <= r; ++k)
          acc[c] += kernel[k] * (slot(x, reflect101(y - k, h), c) +
                                 slot(x, reflect101(y + k, h), c));
      }
      out.at(x, y) = {round_channel(acc[0]), round_channel(acc[1]), round_channel(acc[2]),
                      round_channel(acc[3])};
    }
  }
  return out;
}

}  // namespace mt
