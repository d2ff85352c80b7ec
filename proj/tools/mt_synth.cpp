// mt_synth: writes a deterministic synthetic face corpus (images, landmark
// sidecars, manifest) for tests and demos.
//
//   mt_synth --out DIR [--size 256]
//
// 64 faces: 16 original, 12 each of F2F, DF, FS, NT. Fakes differ only in
// iris colour; lips share one distribution. One DF face ships
// without a sidecar and one NT face has a landmark slightly off the raster,
// so both the discard and the clamp paths are exercised. The default makeup
// spec is written alongside as makeup.json.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mt/mt.hpp"

namespace fs = std::filesystem;
using mt::Point;

namespace {

// 68-point layout for a frontal face on a 256 x 256 canvas.
std::array<Point, 68> template_face() {
  std::array<Point, 68> p{};
  const double pi = std::acos(-1.0);
  for (int i = 0; i <= 16; ++i) {  // jaw
    const double t = pi * i / 16.0;
    p[i] = {128.0 - 88.0 * std::cos(t), 112.0 + 116.0 * std::sin(t)};
  }
  for (int i = 0; i < 5; ++i) {  // brows
    const double dx = 13.0 * i, lift = 6.0 * std::sin(pi * i / 4.0);
    p[17 + i] = {68.0 + dx, 86.0 - lift};
    p[22 + i] = {136.0 + dx, 86.0 - 6.0 * std::sin(pi * (4 - i) / 4.0)};
  }
  for (int i = 0; i < 4; ++i) p[27 + i] = {128.0, 98.0 + 13.0 * i};  // nose bridge
  for (int i = 0; i < 5; ++i) p[31 + i] = {112.0 + 8.0 * i, 150.0 + (i == 2 ? 3.0 : 0.0)};
  const auto eye = [&](int base, double cx) {
    p[base + 0] = {cx - 16, 106};
    p[base + 1] = {cx - 6, 100};
    p[base + 2] = {cx + 6, 100};
    p[base + 3] = {cx + 16, 106};
    p[base + 4] = {cx + 6, 111};
    p[base + 5] = {cx - 6, 111};
  };
  eye(36, 92);
  eye(42, 164);
  // Outer lip 48..59, inner lip 60..67.
  const double lx[12] = {98, 108, 119, 128, 137, 148, 158, 148, 138, 128, 118, 108};
  const double ly[12] = {184, 177, 173, 175, 173, 177, 184, 193, 198, 199, 198, 193};
  for (int i = 0; i < 12; ++i) p[48 + i] = {lx[i], ly[i]};
  const double ix[8] = {104, 118, 128, 138, 152, 138, 128, 118};
  const double iy[8] = {184, 181, 182, 181, 184, 188, 189, 188};
  for (int i = 0; i < 8; ++i) p[60 + i] = {ix[i], iy[i]};
  return p;
}

class Rng {
 public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * (gen_() / 4294967296.0); }
  int integer(int lo, int hi) { return lo + static_cast<int>(gen_() % static_cast<std::uint32_t>(hi - lo + 1)); }

 private:
  std::mt19937 gen_;
};

mt::Polygon ellipse(Point c, double rx, double ry, int n = 96) {
  mt::Polygon poly;
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i)
    poly.vertices.push_back({c.x + rx * std::cos(2 * pi * i / n), c.y + ry * std::sin(2 * pi * i / n)});
  return poly;
}

mt::Polygon chain(const std::array<Point, 68>& p, std::initializer_list<int> idx) {
  mt::Polygon poly;
  for (int i : idx) poly.vertices.push_back(p[i]);
  return poly;
}

mt::Image paint(mt::Image img, const mt::Polygon& poly, mt::Rgb color) {
  mt::Layer layer = mt::Layer::transparent(img.width(), img.height(), color);
  return mt::composite(img, mt::fill_polygon(std::move(layer), poly, color, 255));
}

mt::Polygon stroke(const mt::LandmarkSet& lm, std::vector<int> idx, double thickness) {
  return mt::region_polygon(lm, mt::RegionSpec{"stroke", std::move(idx), mt::Stroke{thickness}});
}

struct Face {
  mt::Image image;
  mt::LandmarkSet landmarks;
};

Face make_face(int index, bool fake, int size) {
  Rng rng(0x5EED0000u + static_cast<std::uint32_t>(index));
  const double s = size / 256.0;
  const double scale = rng.uniform(0.95, 1.05) * s;
  const double dx = rng.uniform(-5, 5) * s, dy = rng.uniform(-5, 5) * s;
  const double c = size / 2.0;

  mt::LandmarkSet lm;
  lm.image_width = lm.image_height = size;
  const auto base = template_face();
  for (int i = 0; i < 68; ++i)
    lm.points[i] = {c + (base[i].x - 128.0) * scale + dx, c + (base[i].y - 128.0) * scale + dy};

  const int grey = rng.integer(40, 90);
  mt::Image img(size, size, mt::Rgb{std::uint8_t(grey), std::uint8_t(grey), std::uint8_t(grey + 8)});

  // Skin keeps a fixed red excess over green/blue so only the lips move the
  // lower-face redness.
  const int tone = rng.integer(150, 200);
  const mt::Rgb skin{std::uint8_t(tone + 35), std::uint8_t(tone), std::uint8_t(tone - 12)};
  const Point centre{c + dx, c + dy - 6 * scale};
  img = paint(std::move(img), ellipse(centre, 92 * scale, 122 * scale), skin);

  const auto& p = lm.points;
  const mt::Rgb brow{60, 45, 40};
  img = paint(std::move(img), stroke(lm, {17, 18, 19, 20, 21}, 4 * scale), brow);
  img = paint(std::move(img), stroke(lm, {22, 23, 24, 25, 26}, 4 * scale), brow);
  img = paint(std::move(img), stroke(lm, {27, 28, 29, 30}, 2 * scale),
              mt::Rgb{std::uint8_t(tone - 10), std::uint8_t(tone - 40), std::uint8_t(tone - 50)});
  img = paint(std::move(img), stroke(lm, {31, 32, 33, 34, 35}, 2 * scale),
              mt::Rgb{std::uint8_t(tone - 10), std::uint8_t(tone - 40), std::uint8_t(tone - 50)});
  for (int base_idx : {36, 42}) {
    img = paint(std::move(img), chain(p, {base_idx, base_idx + 1, base_idx + 2, base_idx + 3, base_idx + 4, base_idx + 5}),
                mt::Rgb{235, 235, 230});
    const Point iris{(p[base_idx].x + p[base_idx + 3].x) / 2, (p[base_idx + 1].y + p[base_idx + 4].y) / 2};
    img = paint(std::move(img), ellipse(iris, 4.5 * scale, 4.5 * scale, 24), fake ? mt::Rgb{45, 60, 80} : mt::Rgb{70, 50, 35});
  }

  const int lip_red = rng.integer(175, 195);
  const int lip_gb = rng.integer(120, 135);
  img = paint(std::move(img), chain(p, {48, 49, 50, 51, 52, 53, 54, 55, 56, 57, 58, 59}),
              mt::Rgb{std::uint8_t(lip_red), std::uint8_t(lip_gb), std::uint8_t(lip_gb + 5)});
  img = paint(std::move(img), stroke(lm, {60, 61, 62, 63, 64}, 1.5 * scale), mt::Rgb{90, 40, 45});

  return {std::move(img), lm};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic face corpus"};
  fs::path out;
  int size = 256;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--size", size, "Image side in pixels")->check(CLI::Range(64, 1024));
  CLI11_PARSE(app, argc, argv);

  try {
    struct Group {
      mt::Method method;
      int count;
    };
    const Group groups[] = {{mt::Method::original, 16}, {mt::Method::F2F, 12}, {mt::Method::DF, 12},
                            {mt::Method::FS, 12}, {mt::Method::NT, 12}};
    std::vector<mt::ManifestEntry> entries;
    int index = 0;
    for (const auto& g : groups) {
      const std::string dir(mt::to_string(g.method));
      fs::create_directories(out / dir);
      for (int k = 0; k < g.count; ++k, ++index) {
        const bool fake = g.method != mt::Method::original;
        Face face = make_face(index, fake, size);
        char id[32];
        std::snprintf(id, sizeof id, "%s_%02d", dir.c_str(), k);
        const auto format = (k == 4) ? mt::ImageFormat::ppm : mt::ImageFormat::png;
        const std::string rel = dir + "/" + id + "." + std::string(mt::to_string(format));
        mt::write_file(out / rel, mt::save_image(face.image, format));
        if (g.method == mt::Method::NT && k == 3) face.landmarks.points[8].y = size + 1.5;  // chin below the frame
        face.landmarks.image = fs::path(rel).filename().string();
        if (!(g.method == mt::Method::DF && k == 7))
          mt::write_file(out / (rel + ".landmarks.json"), mt::serialize_landmarks(face.landmarks) + "\n");
        entries.push_back({id, rel, fake ? mt::Label::deepfake : mt::Label::real, g.method, std::nullopt});
      }
    }
    mt::write_file(out / "manifest.csv", mt::write_manifest(entries));
    mt::write_file(out / "makeup.json", mt::serialize_makeup_spec(mt::default_makeup_spec()));
  } catch (const mt::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
