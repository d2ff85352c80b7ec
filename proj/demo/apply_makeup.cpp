// Applies the default makeup spec to one image.
//
//   apply_makeup IMAGE OUT.png
//
// Landmarks are read from IMAGE.landmarks.json next to the input.

#include <cstdio>

#include "mt/mt.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: apply_makeup IMAGE OUT.png\n");
    return 2;
  }
  try {
    const std::string image_path = argv[1];
    const mt::Image img = mt::load_image(mt::read_file(image_path));
    const mt::LandmarkSet lm = mt::parse_landmarks(mt::read_text_file(image_path + ".landmarks.json"));
    const mt::Image out = mt::apply_makeup(img, lm, mt::default_makeup_spec());
    mt::write_file(argv[2], mt::save_image(out, mt::ImageFormat::png));
  } catch (const mt::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
