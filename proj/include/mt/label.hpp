#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace mt {

/// Ground truth or predicted class; deepfake is the positive class.
enum class Label { real, deepfake };

inline std::string_view to_string(Label l) { return l == Label::real ? "real" : "deepfake"; }

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "real") return Label::real;
  if (s == "deepfake") return Label::deepfake;
  return std::nullopt;
}

/// Manipulation method that produced an image: Face2Face, Deepfakes,
/// FaceSwap, NeuralTextures, or none.
enum class Method { original, F2F, DF, FS, NT };

inline constexpr std::array<Method, 5> kAllMethods = {Method::original, Method::F2F, Method::DF,
                                                      Method::FS, Method::NT};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::original: return "original";
    case Method::F2F: return "F2F";
    case Method::DF: return "DF";
    case Method::FS: return "FS";
    case Method::NT: return "NT";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : kAllMethods)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

}  // namespace mt
