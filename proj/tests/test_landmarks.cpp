#include <gtest/gtest.h>

#include <random>

#include "faces.hpp"
#include "mt/codec.hpp"
#include "mt/landmarks.hpp"

using mt::ErrorCode;

namespace {

std::string sidecar(int count, const std::string& first = "[1.5, 2.5]") {
  std::string pts = "[";
  for (int i = 0; i < count; ++i) pts += (i ? "," : "") + (i == 0 ? first : "[" + std::to_string(i) + ", 10]");
  return R"({"image": "a.png", "width": 256, "height": 256, "points": )" + pts + "]}";
}

ErrorCode parse_error(const std::string& doc, long* detail = nullptr) {
  try {
    mt::parse_landmarks(doc);
  } catch (const mt::Error& e) {
    if (detail) *detail = e.detail();
    return e.code();
  }
  ADD_FAILURE() << "parsed";
  return ErrorCode::Io;
}

mt::LandmarkSet inside_set() {
  mt::LandmarkSet lm;
  lm.image_width = lm.image_height = 256;
  for (int i = 0; i < 68; ++i) lm.points[i] = {10.0 + i, 20.0 + i};
  return lm;
}

}  // namespace

TEST(ParseLandmarks, SixtyEightPointsInOrder) {
  const auto lm = mt::parse_landmarks(sidecar(68));
  EXPECT_EQ(lm.image_width, 256);
  EXPECT_EQ(lm.image_height, 256);
  EXPECT_EQ(lm.image, "a.png");
  EXPECT_EQ(lm.points[0], (mt::Point{1.5, 2.5}));
  EXPECT_EQ(lm.points[67], (mt::Point{67, 10}));
}

TEST(ParseLandmarks, WrongCountReportsCount) {
  long detail = 0;
  EXPECT_EQ(parse_error(sidecar(67), &detail), ErrorCode::WrongPointCount);
  EXPECT_EQ(detail, 67);
  EXPECT_EQ(parse_error(sidecar(69), &detail), ErrorCode::WrongPointCount);
  EXPECT_EQ(detail, 69);
}

TEST(ParseLandmarks, NonFinite) {
  EXPECT_EQ(parse_error(sidecar(68, R"(["NaN", 3])")), ErrorCode::NonFiniteCoordinate);
  EXPECT_EQ(parse_error(sidecar(68, R"([1e999, 3])")), ErrorCode::NonFiniteCoordinate);
}

TEST(ParseLandmarks, MalformedDocuments) {
  EXPECT_EQ(parse_error("{"), ErrorCode::MalformedDocument);
  EXPECT_EQ(parse_error("[]"), ErrorCode::MalformedDocument);
  EXPECT_EQ(parse_error(R"({"width": 2, "height": 2})"), ErrorCode::MalformedDocument);
  EXPECT_EQ(parse_error(R"({"width": 2, "points": []})"), ErrorCode::MalformedDocument);
  EXPECT_EQ(parse_error(sidecar(68, R"([1, "x"])")), ErrorCode::MalformedDocument);
  EXPECT_EQ(parse_error(sidecar(68, R"([1, 2, 3])")), ErrorCode::MalformedDocument);
}

TEST(ParseLandmarks, FuzzedInputsAreClassified) {
  std::mt19937 rng(7);
  const std::string base = sidecar(68);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string doc = base;
    const int edits = 1 + rng() % 4;
    for (int e = 0; e < edits; ++e) {
      const std::size_t pos = rng() % doc.size();
      switch (rng() % 3) {
        case 0: doc[pos] = static_cast<char>(rng() % 128); break;
        case 1: doc.erase(pos, 1 + rng() % 8); break;
        default: doc.insert(pos, 1, "[]{},:\"0-e."[rng() % 11]); break;
      }
      if (doc.empty()) doc = "x";
    }
    try {
      mt::parse_landmarks(doc);
    } catch (const mt::Error&) {
    } catch (...) {
      FAIL() << "unclassified failure for " << doc;
    }
  }
}

TEST(ParseLandmarks, SerializeRoundTrip) {
  const auto lm = faces::sample();
  EXPECT_EQ(mt::parse_landmarks(mt::serialize_landmarks(lm)), lm);
}

TEST(ValidateLandmarks, InsideUnchanged) {
  const mt::Image img(256, 256);
  const auto lm = inside_set();
  for (auto mode : {mt::ValidationMode::strict, mt::ValidationMode::lenient}) {
    const auto v = mt::validate_landmarks(lm, img, mode);
    EXPECT_EQ(v.points, lm.points);
    EXPECT_TRUE(v.clamped.empty());
  }
}

TEST(ValidateLandmarks, StrictRejectsOutside) {
  auto lm = inside_set();
  lm.points[5] = {-3, 10};
  try {
    mt::validate_landmarks(lm, mt::Image(256, 256), mt::ValidationMode::strict);
    FAIL();
  } catch (const mt::Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfBounds);
    EXPECT_EQ(e.detail(), 5);
  }
}

TEST(ValidateLandmarks, LenientClampsAndFlags) {
  auto lm = inside_set();
  lm.points[5] = {-3, 10};
  lm.points[9] = {100, 256};
  const auto v = mt::validate_landmarks(lm, mt::Image(256, 256), mt::ValidationMode::lenient);
  EXPECT_EQ(v.points[5], (mt::Point{0, 10}));
  EXPECT_EQ(v.points[9].x, 100);
  EXPECT_LT(v.points[9].y, 256);
  EXPECT_GT(v.points[9].y, 255.999);
  EXPECT_EQ(v.clamped, (std::vector<int>{5, 9}));
}

TEST(ValidateLandmarks, DimensionMismatchInBothModes) {
  const auto lm = inside_set();
  for (auto mode : {mt::ValidationMode::strict, mt::ValidationMode::lenient}) {
    try {
      mt::validate_landmarks(lm, mt::Image(128, 256), mode);
      FAIL();
    } catch (const mt::Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
  }
}

TEST(ValidateLandmarks, StrictSuccessImpliesLenientIdentity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(-20.0, 70.0);
  const mt::Image img(64, 64);
  for (int trial = 0; trial < 200; ++trial) {
    mt::LandmarkSet lm;
    lm.image_width = lm.image_height = 64;
    for (auto& p : lm.points) p = {coord(rng) * (trial % 2 ? 0.5 : 1.0) + 10, coord(rng) * 0.5 + 10};
    bool strict_ok = true;
    mt::LandmarkSet strict;
    try {
      strict = mt::validate_landmarks(lm, img, mt::ValidationMode::strict);
    } catch (const mt::Error&) {
      strict_ok = false;
    }
    const auto lenient = mt::validate_landmarks(lm, img, mt::ValidationMode::lenient);
    if (strict_ok) {
      EXPECT_EQ(lenient.points, strict.points);
      EXPECT_TRUE(lenient.clamped.empty());
    } else {
      EXPECT_FALSE(lenient.clamped.empty());
    }
  }
}
