#pragma once

// Landmark sets for tests, taken from the committed synthetic corpus.

#include "mt/codec.hpp"
#include "mt/io.hpp"
#include "mt/landmarks.hpp"
#include "test_support.hpp"

namespace faces {

inline mt::LandmarkSet sample(const char* rel = "original/original_00.png") {
  return mt::parse_landmarks(
      mt::read_text_file(testing_support::kDataDir / "synthetic" / (std::string(rel) + ".landmarks.json")));
}

inline mt::Image sample_image(const char* rel = "original/original_00.png") {
  return mt::load_image(mt::read_file(testing_support::kDataDir / "synthetic" / rel));
}

}  // namespace faces
