#pragma once

// The perturbation pipeline: each artifact is rasterized onto its own layer
// at its landmark regions, blurred, and composited over the running image.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mt/error.hpp"
#include "mt/geometry.hpp"
#include "mt/imaging.hpp"
#include "mt/landmarks.hpp"
#include "mt/raster.hpp"

namespace mt {

enum class ArtifactKind { eyeliner, eyeshadow, blush, lipstick };

inline std::string_view to_string(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::eyeliner: return "eyeliner";
    case ArtifactKind::eyeshadow: return "eyeshadow";
    case ArtifactKind::blush: return "blush";
    case ArtifactKind::lipstick: return "lipstick";
  }
  return "?";
}

inline std::optional<ArtifactKind> parse_artifact_kind(std::string_view s) {
  if (s == "eyeliner") return ArtifactKind::eyeliner;
  if (s == "eyeshadow") return ArtifactKind::eyeshadow;
  if (s == "blush") return ArtifactKind::blush;
  if (s == "lipstick") return ArtifactKind::lipstick;
  return std::nullopt;
}

struct MakeupArtifact {
  ArtifactKind kind = ArtifactKind::lipstick;
  Rgb color;
  std::uint8_t opacity = 255;
  double blur_sigma = 0.0;
  std::vector<std::string> regions;

  friend bool operator==(const MakeupArtifact&, const MakeupArtifact&) = default;
};

/// Artifacts in application order plus replacements (or additions) for the
/// default region table.
struct MakeupSpec {
  std::vector<MakeupArtifact> artifacts;
  std::map<std::string, RegionSpec> region_table_overrides;

  friend bool operator==(const MakeupSpec&, const MakeupSpec&) = default;
};

using RegionTable = std::map<std::string, RegionSpec>;

inline RegionTable region_table(const MakeupSpec& spec) {
  RegionTable table = default_region_table();
  for (const auto& [name, region] : spec.region_table_overrides) table[name] = region;
  return table;
}

inline void check_artifact(const MakeupArtifact& a, const RegionTable& table) {
  const std::string kind(to_string(a.kind));
  if (a.kind == ArtifactKind::eyeliner && a.blur_sigma != 0.0)
    throw Error(ErrorCode::InvalidArtifact, "eyeliner is never blurred (blur_sigma must be 0)");
  if (!(a.blur_sigma >= 0.0) || !std::isfinite(a.blur_sigma))
    throw Error(ErrorCode::InvalidArtifact, kind + ": blur_sigma must be >= 0");
  if (a.regions.empty()) throw Error(ErrorCode::InvalidArtifact, kind + ": no regions");
  for (const auto& r : a.regions)
    if (!table.contains(r))
      throw Error(ErrorCode::InvalidArtifact, kind + ": unknown region \"" + r + "\"");
}

inline void check_spec(const MakeupSpec& spec) {
  const RegionTable table = region_table(spec);
  for (const auto& [name, region] : spec.region_table_overrides) check_region_spec(region);
  for (const auto& a : spec.artifacts) check_artifact(a, table);
}

/// Defaults chosen to read as natural makeup on a 256x256 face, applied
/// bottom layer first.
inline MakeupSpec default_makeup_spec() {
  MakeupSpec spec;
  spec.artifacts = {
      {ArtifactKind::eyeshadow, {120, 70, 90}, 102, 3.0, {"left_eyeshadow", "right_eyeshadow"}},
      {ArtifactKind::eyeliner, {20, 20, 20}, 255, 0.0, {"left_eyeliner", "right_eyeliner"}},
      {ArtifactKind::blush, {200, 90, 110}, 64, 5.0, {"left_cheek", "right_cheek"}},
      {ArtifactKind::lipstick,
       {150, 30, 50},
       153,
       1.0,
       {"top_outer_lip", "top_inner_lip", "bottom_outer_lip", "bottom_inner_lip"}},
  };
  return spec;
}

// ---- JSON document ----

namespace makeup_detail {

inline std::uint8_t byte_field(const nlohmann::json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 255)
    throw Error(ErrorCode::MalformedDocument, what + " must be an integer 0-255");
  return static_cast<std::uint8_t>(v.get<int>());
}

inline RegionSpec parse_region(const std::string& name, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedDocument, "region " + name + " is not an object");
  RegionSpec r;
  r.name = name;
  try {
    r.indices = j.at("indices").get<std::vector<int>>();
    const auto kind = j.at("construction").get<std::string>();
    if (kind == "closed_polygon") {
      r.construction = ClosedPolygon{};
    } else if (kind == "stroke") {
      r.construction = Stroke{j.value("thickness", 2.0)};
    } else if (kind == "offset_band") {
      r.construction = OffsetBand{j.value("offset_fraction", 0.6)};
    } else {
      throw Error(ErrorCode::MalformedDocument, "region " + name + ": unknown construction " + kind);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, "region " + name + ": " + e.what());
  }
  check_region_spec(r);
  return r;
}

inline nlohmann::ordered_json region_json(const RegionSpec& r) {
  nlohmann::ordered_json j;
  j["indices"] = r.indices;
  if (std::holds_alternative<ClosedPolygon>(r.construction)) {
    j["construction"] = "closed_polygon";
  } else if (const auto* s = std::get_if<Stroke>(&r.construction)) {
    j["construction"] = "stroke";
    j["thickness"] = s->thickness;
  } else {
    j["construction"] = "offset_band";
    j["offset_fraction"] = std::get<OffsetBand>(r.construction).offset_fraction;
  }
  return j;
}

}  // namespace makeup_detail

inline MakeupSpec parse_makeup_spec(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("makeup spec: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("artifacts") || !doc["artifacts"].is_array())
    throw Error(ErrorCode::MalformedDocument, "makeup spec needs an \"artifacts\" array");
  MakeupSpec spec;
  if (auto it = doc.find("region_table_overrides"); it != doc.end() && !it->is_null()) {
    if (!it->is_object())
      throw Error(ErrorCode::MalformedDocument, "region_table_overrides must be an object");
    for (const auto& [name, value] : it->items())
      spec.region_table_overrides[name] = makeup_detail::parse_region(name, value);
  }
  std::size_t n = 0;
  for (const auto& a : doc["artifacts"]) {
    const std::string where = "artifact " + std::to_string(n++);
    if (!a.is_object()) throw Error(ErrorCode::MalformedDocument, where + " is not an object");
    MakeupArtifact art;
    try {
      const auto kind = a.at("kind").get<std::string>();
      const auto parsed = parse_artifact_kind(kind);
      if (!parsed) throw Error(ErrorCode::MalformedDocument, where + ": unknown kind " + kind);
      art.kind = *parsed;
      const auto& c = a.at("color");
      if (!c.is_array() || c.size() != 3)
        throw Error(ErrorCode::MalformedDocument, where + ": color must be [r, g, b]");
      art.color = {makeup_detail::byte_field(c[0], where + " color"),
                   makeup_detail::byte_field(c[1], where + " color"),
                   makeup_detail::byte_field(c[2], where + " color")};
      art.opacity = makeup_detail::byte_field(a.at("opacity"), where + " opacity");
      art.blur_sigma = a.value("blur_sigma", 0.0);
      art.regions = a.at("regions").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedDocument, where + ": " + e.what());
    }
    spec.artifacts.push_back(std::move(art));
  }
  check_spec(spec);
  return spec;
}

inline std::string serialize_makeup_spec(const MakeupSpec& spec) {
  nlohmann::ordered_json doc;
  auto arts = nlohmann::ordered_json::array();
  for (const auto& a : spec.artifacts) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(a.kind);
    j["color"] = {a.color.r, a.color.g, a.color.b};
    j["opacity"] = a.opacity;
    j["blur_sigma"] = a.blur_sigma;
    j["regions"] = a.regions;
    arts.push_back(std::move(j));
  }
  doc["artifacts"] = std::move(arts);
  if (!spec.region_table_overrides.empty()) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [name, r] : spec.region_table_overrides) o[name] = makeup_detail::region_json(r);
    doc["region_table_overrides"] = std::move(o);
  }
  return doc.dump(2) + "\n";
}

// ---- application ----

/// Region polygon with stroke thickness scaled from the 256-pixel reference
/// face to the actual image height.
inline Polygon scaled_region_polygon(const LandmarkSet& lm, RegionSpec region) {
  if (auto* s = std::get_if<Stroke>(&region.construction))
    s->thickness *= lm.image_height / kReferenceFaceHeight;
  return region_polygon(lm, region);
}

/// Fills every region of `a` onto one transparent layer, blurs it, and
/// composites it over `img`. Geometry failures surface as ArtifactFailed.
inline Image apply_artifact(const Image& img, const LandmarkSet& lm, const MakeupArtifact& a,
                            const RegionTable& table) {
  check_artifact(a, table);
  if (a.opacity == 0) return img;
  Layer layer = Layer::transparent(img.width(), img.height(), a.color);
  for (const auto& name : a.regions) {
    Polygon poly;
    try {
      poly = scaled_region_polygon(lm, table.at(name));
    } catch (const Error& e) {
      throw Error(ErrorCode::ArtifactFailed,
                  std::string(to_string(a.kind)) + " at " + name + ": " + e.what());
    }
    layer = is_convex(poly) ? fill_convex_polygon(std::move(layer), poly, a.color, a.opacity)
                            : fill_polygon(std::move(layer), poly, a.color, a.opacity);
  }
  return composite(img, gaussian_blur(layer, a.blur_sigma));
}

inline Image apply_artifact(const Image& img, const LandmarkSet& lm, const MakeupArtifact& a) {
  return apply_artifact(img, lm, a, default_region_table());
}

/// Left fold of apply_artifact over the artifacts in order.
inline Image apply_makeup(const Image& img, const LandmarkSet& lm, const MakeupSpec& spec) {
  const RegionTable table = region_table(spec);
  Image out = img;
  for (const auto& a : spec.artifacts) {
    try {
      out = apply_artifact(out, lm, a, table);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ArtifactFailed) throw;
      throw Error(ErrorCode::PerturbationFailed, e.what());
    }
  }
  return out;
}

}  // namespace mt
