#pragma once

// Independent reference implementations for the rasterizer and blur tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mt/geometry.hpp"
#include "mt/imaging.hpp"

namespace oracle {

/// Distance from p to segment ab.
inline double segment_distance(mt::Point p, mt::Point a, mt::Point b) {
  const mt::Point ab = b - a, ap = p - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  const double t = len2 > 0 ? std::clamp((ap.x * ab.x + ap.y * ab.y) / len2, 0.0, 1.0) : 0.0;
  return mt::length(p - (a + ab * t));
}

inline double edge_distance(mt::Point p, const mt::Polygon& poly) {
  double d = 1e300;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) d = std::min(d, segment_distance(p, v[i], v[(i + 1) % v.size()]));
  return d;
}

/// Even-odd classification by winding-free ray casting towards -x with
/// closed-open edge handling in the opposite sense to the library, so the
/// two agree only away from edges.
inline bool inside_even_odd(mt::Point p, const mt::Polygon& poly) {
  int crossings = 0;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const mt::Point a = v[i], b = v[(i + 1) % v.size()];
    if ((a.y <= p.y) == (b.y <= p.y)) continue;
    const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
    if (x < p.x) ++crossings;
  }
  return crossings % 2 == 1;
}

inline mt::Polygon random_polygon(std::mt19937& rng, int max_vertices, double extent) {
  std::uniform_int_distribution<int> count(3, max_vertices);
  std::uniform_real_distribution<double> coord(-4.0, extent + 4.0);
  mt::Polygon poly;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) poly.vertices.push_back({coord(rng), coord(rng)});
  return poly;
}

/// Convex hull (monotone chain), counter-clockwise, collinear points dropped.
inline mt::Polygon convex_hull(std::vector<mt::Point> pts) {
  std::sort(pts.begin(), pts.end(), [](auto a, auto b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<mt::Point> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && mt::cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && mt::cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return mt::Polygon{h};
}

inline int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

/// Direct 2-D convolution with the product kernel, weights recomputed here.
inline mt::Layer blur_2d(const mt::Layer& in, double sigma) {
  const int r = static_cast<int>(std::ceil(3 * sigma));
  std::vector<double> w(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += w[i + r] = std::exp(-i * i / (2 * sigma * sigma));
  for (auto& x : w) x /= sum;
  mt::Layer out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      double acc[4] = {0, 0, 0, 0};
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i) {
          const auto& t = in.at(reflect(x + i, in.width()), reflect(y + j, in.height()));
          const double k = w[i + r] * w[j + r];
          acc[0] += k * t.r;
          acc[1] += k * t.g;
          acc[2] += k * t.b;
          acc[3] += k * t.a;
        }
      auto q = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); };
      out.at(x, y) = {q(acc[0]), q(acc[1]), q(acc[2]), q(acc[3])};
    }
  return out;
}

inline mt::Layer random_layer(std::mt19937& rng, int w, int h) {
  mt::Layer l(w, h);
  for (auto& t : l.texels()) t = {std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng()), std::uint8_t(rng())};
  return l;
}

}  // namespace oracle
