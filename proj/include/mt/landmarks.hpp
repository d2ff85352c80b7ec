#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mt/error.hpp"
#include "mt/imaging.hpp"
#include "mt/point.hpp"

namespace mt {

inline constexpr int kLandmarkCount = 68;

/// 68-point facial landmarks in the standard layout: jaw 0-16, brows 17-26,
/// nose 27-35, eyes 36-47, outer lip 48-59, inner lip 60-67.
struct LandmarkSet {
  std::array<Point, kLandmarkCount> points{};
  int image_width = 0;
  int image_height = 0;
  std::optional<std::string> image;  // path named by the sidecar, if any
  std::vector<int> clamped;          // indices moved by lenient validation

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;
};

enum class ValidationMode { strict, lenient };

namespace landmark_detail {

inline double coordinate(const nlohmann::json& v, std::size_t index) {
  double value = 0.0;
  if (v.is_number()) {
    value = v.get<double>();
  } else if (v.is_string()) {
    // Producers that cannot write bare NaN/Infinity in JSON quote them.
    const auto s = v.get<std::string>();
    char* end = nullptr;
    value = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
      throw Error(ErrorCode::MalformedDocument,
                  "point " + std::to_string(index) + ": coordinate \"" + s + "\" is not a number",
                  static_cast<long>(index));
  } else {
    throw Error(ErrorCode::MalformedDocument,
                "point " + std::to_string(index) + ": coordinate is not a number",
                static_cast<long>(index));
  }
  if (!std::isfinite(value))
    throw Error(ErrorCode::NonFiniteCoordinate, "point " + std::to_string(index),
                static_cast<long>(index));
  return value;
}

inline int dimension(const nlohmann::json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_number_integer())
    throw Error(ErrorCode::MalformedDocument, std::string("missing integer \"") + key + "\"");
  const auto v = it->get<long long>();
  if (v <= 0 || v > kMaxImageDimension)
    throw Error(ErrorCode::MalformedDocument, std::string(key) + " out of range");
  return static_cast<int>(v);
}

}  // namespace landmark_detail

/// Reads the points array of a sidecar or provider response. Points keep
/// document order.
inline std::array<Point, kLandmarkCount> parse_point_list(const nlohmann::json& points) {
  if (!points.is_array()) throw Error(ErrorCode::MalformedDocument, "\"points\" is not an array");
  if (points.size() != kLandmarkCount)
    throw Error(ErrorCode::WrongPointCount,
                "expected 68 points, found " + std::to_string(points.size()),
                static_cast<long>(points.size()));
  std::array<Point, kLandmarkCount> out{};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!p.is_array() || p.size() != 2)
      throw Error(ErrorCode::MalformedDocument,
                  "point " + std::to_string(i) + " is not an [x, y] pair", static_cast<long>(i));
    out[i] = {landmark_detail::coordinate(p[0], i), landmark_detail::coordinate(p[1], i)};
  }
  return out;
}

inline LandmarkSet parse_landmarks(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::out_of_range& e) {
    // A literal such as 1e999 overflows to infinity.
    throw Error(ErrorCode::NonFiniteCoordinate, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::MalformedDocument, "sidecar is not a JSON object");
  LandmarkSet lm;
  lm.image_width = landmark_detail::dimension(doc, "width");
  lm.image_height = landmark_detail::dimension(doc, "height");
  if (auto it = doc.find("image"); it != doc.end()) {
    if (!it->is_string()) throw Error(ErrorCode::MalformedDocument, "\"image\" is not a string");
    lm.image = it->get<std::string>();
  }
  const auto pts = doc.find("points");
  if (pts == doc.end()) throw Error(ErrorCode::MalformedDocument, "missing \"points\"");
  lm.points = parse_point_list(*pts);
  return lm;
}

inline std::string serialize_landmarks(const LandmarkSet& lm) {
  nlohmann::ordered_json doc;
  if (lm.image) doc["image"] = *lm.image;
  doc["width"] = lm.image_width;
  doc["height"] = lm.image_height;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : lm.points) pts.push_back({p.x, p.y});
  doc["points"] = std::move(pts);
  return doc.dump();
}

/// Strict mode rejects any point outside [0, width) x [0, height); lenient
/// mode clamps such points onto the raster and lists them in `clamped`.
/// A width/height disagreement with the image fails in both modes.
inline LandmarkSet validate_landmarks(const LandmarkSet& lm, const Image& img, ValidationMode mode) {
  if (lm.image_width != img.width() || lm.image_height != img.height())
    throw Error(ErrorCode::DimensionMismatch,
                "landmarks for " + std::to_string(lm.image_width) + "x" +
                    std::to_string(lm.image_height) + ", image is " + std::to_string(img.width()) +
                    "x" + std::to_string(img.height()));
  LandmarkSet out = lm;
  out.clamped.clear();
  const double max_x = std::nextafter(static_cast<double>(img.width()), 0.0);
  const double max_y = std::nextafter(static_cast<double>(img.height()), 0.0);
  for (int i = 0; i < kLandmarkCount; ++i) {
    Point& p = out.points[i];
    const bool inside = p.x >= 0.0 && p.x < img.width() && p.y >= 0.0 && p.y < img.height();
    if (inside) continue;
    if (mode == ValidationMode::strict)
      throw Error(ErrorCode::OutOfBounds,
                  "point " + std::to_string(i) + " (" + std::to_string(p.x) + ", " +
                      std::to_string(p.y) + ") lies outside the image",
                  i);
    p.x = std::clamp(p.x, 0.0, max_x);
    p.y = std::clamp(p.y, 0.0, max_y);
    out.clamped.push_back(i);
  }
  return out;
}

}  // namespace mt
