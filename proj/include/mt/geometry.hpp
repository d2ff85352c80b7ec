#pragma once

// Makeup-region polygons built from landmark index chains.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mt/error.hpp"
#include "mt/landmarks.hpp"
#include "mt/point.hpp"

namespace mt {

struct ClosedPolygon {
  friend bool operator==(const ClosedPolygon&, const ClosedPolygon&) = default;
};

/// Band of width `thickness` centered on the index chain (eyeliner).
struct Stroke {
  double thickness = 2.0;
  friend bool operator==(const Stroke&, const Stroke&) = default;
};

/// The chain plus a copy pushed away from the chain centroid by
/// `offset_fraction` times the chain's bounding-box height (eyeshadow).
struct OffsetBand {
  double offset_fraction = 0.6;
  friend bool operator==(const OffsetBand&, const OffsetBand&) = default;
};

using Construction = std::variant<ClosedPolygon, Stroke, OffsetBand>;

struct RegionSpec {
  std::string name;
  std::vector<int> indices;
  Construction construction;

  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

struct Polygon {
  std::vector<Point> vertices;
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct BoundingBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

inline BoundingBox bounding_box(const std::vector<Point>& pts) {
  BoundingBox box{pts.front().x, pts.front().y, pts.front().x, pts.front().y};
  for (const auto& p : pts) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

inline BoundingBox bounding_box(const Polygon& poly) { return bounding_box(poly.vertices); }

/// Throws InvalidRegion / TooFewIndices if the spec breaks its invariants.
inline void check_region_spec(const RegionSpec& spec) {
  for (int i : spec.indices)
    if (i < 0 || i >= kLandmarkCount)
      throw Error(ErrorCode::InvalidRegion,
                  spec.name + ": landmark index " + std::to_string(i) + " outside 0-67", i);
  const std::size_t min_indices = std::holds_alternative<Stroke>(spec.construction) ? 2 : 3;
  if (spec.indices.size() < min_indices)
    throw Error(ErrorCode::TooFewIndices,
                spec.name + ": " + std::to_string(spec.indices.size()) + " indices, need " +
                    std::to_string(min_indices),
                static_cast<long>(spec.indices.size()));
  if (const auto* s = std::get_if<Stroke>(&spec.construction);
      s && !(s->thickness > 0.0 && std::isfinite(s->thickness)))
    throw Error(ErrorCode::InvalidRegion, spec.name + ": stroke thickness must be > 0");
  if (const auto* b = std::get_if<OffsetBand>(&spec.construction);
      b && !(b->offset_fraction > 0.0 && b->offset_fraction <= 2.0))
    throw Error(ErrorCode::InvalidRegion, spec.name + ": offset_fraction must be in (0, 2]");
}

namespace geometry_detail {

inline Point unit(Point v) {
  const double len = length(v);
  return len > 0.0 ? Point{v.x / len, v.y / len} : Point{};
}

// Direction of travel at each chain vertex: the mean of the adjacent segment
// directions. Zero-length segments borrow the nearest non-degenerate one.
inline std::vector<Point> chain_normals(const std::vector<Point>& chain, const std::string& name) {
  const std::size_t n = chain.size();
  std::vector<Point> seg(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) seg[i] = unit(chain[i + 1] - chain[i]);
  auto nonzero = [](Point p) { return p.x != 0.0 || p.y != 0.0; };
  // Fill degenerate segments from neighbours, forward then backward.
  for (std::size_t i = 1; i < seg.size(); ++i)
    if (!nonzero(seg[i])) seg[i] = seg[i - 1];
  for (std::size_t i = seg.size() - 1; i-- > 0;)
    if (!nonzero(seg[i])) seg[i] = seg[i + 1];
  if (!nonzero(seg.front()))
    throw Error(ErrorCode::DegenerateRegion, name + ": chain has no extent");

  std::vector<Point> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point dir;
    if (i == 0) dir = seg.front();
    else if (i == n - 1) dir = seg.back();
    else {
      dir = unit(seg[i - 1] + seg[i]);
      if (!nonzero(dir)) dir = seg[i - 1];  // chain doubles back on itself
    }
    normals[i] = {-dir.y, dir.x};
  }
  return normals;
}

inline bool all_within(const std::vector<Point>& pts, double tolerance) {
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (length(pts[i] - pts[j]) > tolerance) return false;
  return true;
}

}  // namespace geometry_detail

inline Polygon region_polygon(const LandmarkSet& lm, const RegionSpec& spec) {
  check_region_spec(spec);
  std::vector<Point> chain;
  chain.reserve(spec.indices.size());
  for (int i : spec.indices) chain.push_back(lm.points[i]);
  if (geometry_detail::all_within(chain, 0.5))
    throw Error(ErrorCode::DegenerateRegion, spec.name + ": all points within 0.5 px");

  if (std::holds_alternative<ClosedPolygon>(spec.construction)) return Polygon{std::move(chain)};

  const auto normals = geometry_detail::chain_normals(chain, spec.name);
  const std::size_t n = chain.size();
  Polygon poly;
  poly.vertices.reserve(2 * n);

  if (const auto* stroke = std::get_if<Stroke>(&spec.construction)) {
    const double half = stroke->thickness / 2.0;
    for (std::size_t i = 0; i < n; ++i) poly.vertices.push_back(chain[i] + normals[i] * half);
    for (std::size_t i = n; i-- > 0;) poly.vertices.push_back(chain[i] - normals[i] * half);
    return poly;
  }

  const auto& band = std::get<OffsetBand>(spec.construction);
  const BoundingBox box = bounding_box(chain);
  const double distance = band.offset_fraction * (box.max_y - box.min_y);
  if (!(distance > 0.0))
    throw Error(ErrorCode::DegenerateRegion, spec.name + ": chain has zero bounding-box height");
  Point centroid;
  for (const auto& p : chain) centroid = centroid + p;
  centroid = centroid * (1.0 / static_cast<double>(n));
  // One orientation for the whole chain so the band never twists; a chain
  // with no outward preference is pushed towards smaller y (up the face).
  double outward = 0.0, upward = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point rel = chain[i] - centroid;
    outward += normals[i].x * rel.x + normals[i].y * rel.y;
    upward -= normals[i].y;
  }
  const double sign = outward != 0.0 ? (outward > 0.0 ? 1.0 : -1.0) : (upward >= 0.0 ? 1.0 : -1.0);
  for (std::size_t i = 0; i < n; ++i) poly.vertices.push_back(chain[i]);
  for (std::size_t i = n; i-- > 0;)
    poly.vertices.push_back(chain[i] + normals[i] * (sign * distance));
  return poly;
}

/// Default region table for the standard 68-point layout. Stroke thickness
/// is expressed for a 256-pixel-high face.
inline std::map<std::string, RegionSpec> default_region_table() {
  const auto closed = [](std::string name, std::vector<int> idx) {
    return RegionSpec{std::move(name), std::move(idx), ClosedPolygon{}};
  };
  std::vector<RegionSpec> specs = {
      {"left_eyeliner", {36, 37, 38, 39}, Stroke{2.0}},
      {"right_eyeliner", {42, 43, 44, 45}, Stroke{2.0}},
      {"left_eyeshadow", {36, 37, 38, 39}, OffsetBand{0.6}},
      {"right_eyeshadow", {42, 43, 44, 45}, OffsetBand{0.6}},
      closed("left_cheek", {1, 2, 3, 48, 31, 36}),
      closed("right_cheek", {15, 14, 13, 35, 45}),
      closed("top_outer_lip", {48, 49, 50, 51, 52, 53, 54}),
      closed("top_inner_lip", {54, 64, 63, 62, 61, 60, 48}),
      closed("bottom_outer_lip", {54, 55, 56, 57, 58, 59, 48}),
      closed("bottom_inner_lip", {48, 60, 66, 67, 65, 64, 54}),
  };
  std::map<std::string, RegionSpec> table;
  for (auto& s : specs) table.emplace(s.name, std::move(s));
  return table;
}

inline constexpr double kReferenceFaceHeight = 256.0;

}  // namespace mt
