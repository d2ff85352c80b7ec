#include <gtest/gtest.h>

#include <random>

#include "mt/raster.hpp"
#include "raster_oracles.hpp"

using mt::Layer;
using mt::Point;
using mt::Polygon;
using mt::Rgb;
using mt::Rgba;

namespace {

const Rgb kInk{9, 8, 7};

std::vector<std::pair<int, int>> filled(const Layer& l) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < l.height(); ++y)
    for (int x = 0; x < l.width(); ++x)
      if (l.at(x, y).a) out.emplace_back(x, y);
  return out;
}

std::vector<std::pair<int, int>> oracle_set(const Polygon& poly, int w, int h) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (oracle::inside_even_odd({x + 0.5, y + 0.5}, poly)) out.emplace_back(x, y);
  return out;
}

const Polygon kSquare{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}};
const Polygon kBowtie{{{0, 0}, {4, 4}, {4, 0}, {0, 4}}};

}  // namespace

TEST(PointInPolygon, Basics) {
  EXPECT_TRUE(mt::point_in_polygon({2, 2}, kSquare));
  EXPECT_FALSE(mt::point_in_polygon({-1, 2}, kSquare));
  EXPECT_FALSE(mt::point_in_polygon({5, 2}, kSquare));
}

TEST(PointInPolygon, BowtieMatchesCrossingParityOnFineGrid) {
  for (double y = -0.995; y < 5; y += 0.01)
    for (double x = -0.995; x < 5; x += 0.01) {
      const Point p{x, y};
      if (oracle::edge_distance(p, kBowtie) < 1e-6) continue;
      ASSERT_EQ(mt::point_in_polygon(p, kBowtie), oracle::inside_even_odd(p, kBowtie)) << x << ',' << y;
    }
}

TEST(FillPolygon, SquareFillsSixteenTexels) {
  const Layer l = mt::fill_polygon(Layer(8, 8), kSquare, kInk, 255);
  const auto set = filled(l);
  EXPECT_EQ(set.size(), 16u);
  EXPECT_EQ(set, oracle_set(kSquare, 8, 8));
  for (auto [x, y] : set) {
    EXPECT_LT(x, 4);
    EXPECT_LT(y, 4);
    EXPECT_EQ(l.at(x, y), (Rgba{9, 8, 7, 255}));
  }
}

TEST(FillPolygon, BowtieFillsBothLobes) {
  // Edge slopes of 3/4 keep every texel center off the boundary.
  const Polygon bowtie{{{0, 0}, {8, 6}, {8, 0}, {0, 6}}};
  const Layer l = mt::fill_polygon(Layer(10, 8), bowtie, kInk, 200);
  EXPECT_EQ(filled(l), oracle_set(bowtie, 10, 8));
  EXPECT_TRUE(l.at(0, 3).a);   // left lobe
  EXPECT_TRUE(l.at(7, 3).a);   // right lobe
  EXPECT_FALSE(l.at(4, 0).a);  // above the crossing
  EXPECT_FALSE(l.at(4, 5).a);  // below the crossing
  EXPECT_EQ(l.at(0, 3).a, 200);
}

TEST(FillPolygon, DegenerateIsNoOp) {
  const Layer before(6, 6, Rgba{1, 2, 3, 4});
  const Polygon poly{{{1, 1}, {1, 1}, {3, 3}, {3, 3}, {1, 1}, {3, 3}}};
  EXPECT_EQ(mt::fill_polygon(before, poly, kInk, 255), before);
  EXPECT_EQ(mt::fill_convex_polygon(before, poly, kInk, 255), before);
}

TEST(FillPolygon, OutsideTexelsUntouched) {
  const Layer before(8, 8, Rgba{1, 2, 3, 4});
  const Layer after = mt::fill_polygon(before, Polygon{{{1, 1}, {6, 1}, {3, 5}}}, kInk, 255);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      if (!mt::point_in_polygon({x + 0.5, y + 0.5}, Polygon{{{1, 1}, {6, 1}, {3, 5}}}))
      {
        EXPECT_EQ(after.at(x, y), before.at(x, y));
      }
}

TEST(FillPolygon, RandomPolygonsAgreeWithOracleAwayFromEdges) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 8 + rng() % 57, h = 8 + rng() % 57;
    const Polygon poly = oracle::random_polygon(rng, 12, std::max(w, h));
    const Layer l = mt::fill_polygon(Layer(w, h), poly, kInk, 255);
    const auto box = mt::bounding_box(poly);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Point c{x + 0.5, y + 0.5};
        if (l.at(x, y).a) {
          ASSERT_GE(c.x, box.min_x);
          ASSERT_LE(c.x, box.max_x);
          ASSERT_GE(c.y, box.min_y);
          ASSERT_LE(c.y, box.max_y);
        }
        if (oracle::edge_distance(c, poly) <= 1.0) continue;
        ASSERT_EQ(l.at(x, y).a != 0, oracle::inside_even_odd(c, poly)) << "trial " << trial << " at " << x << ',' << y;
      }
  }
}

TEST(FillConvexPolygon, TriangleAndSquareMatchGeneralFill) {
  const Polygon tri{{{1, 1}, {6, 1}, {3, 5}}};
  EXPECT_EQ(mt::fill_convex_polygon(Layer(8, 8), tri, kInk, 255), mt::fill_polygon(Layer(8, 8), tri, kInk, 255));
  const Layer sq = mt::fill_convex_polygon(Layer(8, 8), kSquare, kInk, 255);
  EXPECT_EQ(filled(sq), oracle_set(kSquare, 8, 8));
}

TEST(FillConvexPolygon, BowtieRejected) {
  try {
    mt::fill_convex_polygon(Layer(8, 8), kBowtie, kInk, 255);
    FAIL();
  } catch (const mt::Error& e) {
    EXPECT_EQ(e.code(), mt::ErrorCode::NotConvex);
  }
}

TEST(FillConvexPolygon, StarRejected) {
  Polygon star;
  for (int k = 0; k < 5; ++k) {
    const double a = 2 * std::acos(-1.0) * (2 * k) / 5.0;
    star.vertices.push_back({10 + 8 * std::cos(a), 10 + 8 * std::sin(a)});
  }
  EXPECT_FALSE(mt::is_convex(star));
}

TEST(FillConvexPolygon, RandomConvexPolygonsMatchGeneralFillExactly) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> coord(-3.0, 67.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> pts(3 + rng() % 10);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    Polygon hull = oracle::convex_hull(pts);
    if (hull.vertices.size() < 3) continue;
    if (trial % 2) std::reverse(hull.vertices.begin(), hull.vertices.end());
    ASSERT_TRUE(mt::is_convex(hull));
    EXPECT_EQ(mt::fill_convex_polygon(Layer(64, 64), hull, kInk, 255), mt::fill_polygon(Layer(64, 64), hull, kInk, 255))
        << "trial " << trial;
  }
}

TEST(Kernel, WeightsSumToOneAndAreSymmetric) {
  for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
    const mt::Kernel1D k(sigma);
    EXPECT_EQ(k.radius(), static_cast<int>(std::ceil(3 * sigma)));
    double sum = 0;
    for (double w : k.weights()) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    for (int i = 1; i <= k.radius(); ++i) EXPECT_EQ(k[i], k[-i]);
  }
}

TEST(Kernel, NegativeSigma) {
  EXPECT_THROW(mt::Kernel1D(-0.1), mt::Error);
  EXPECT_THROW(mt::gaussian_blur(Layer(3, 3), -1), mt::Error);
  EXPECT_THROW(mt::Kernel1D(std::nan("")), mt::Error);
}

TEST(Blur, SigmaZeroIsIdentity) {
  std::mt19937 rng(1);
  const Layer l = oracle::random_layer(rng, 9, 7);
  EXPECT_EQ(mt::gaussian_blur(l, 0.0), l);
}

TEST(Blur, ConstantLayerInvariant) {
  for (double sigma : {0.5, 1.0, 2.0, 5.0})
    for (Rgba c : {Rgba{0, 0, 0, 0}, Rgba{255, 255, 255, 255}, Rgba{17, 130, 254, 1}}) {
      const Layer out = mt::gaussian_blur(Layer(20, 13, c), sigma);
      for (const auto& t : out.texels()) {
        EXPECT_LE(std::abs(t.r - c.r), 1);
        EXPECT_LE(std::abs(t.g - c.g), 1);
        EXPECT_LE(std::abs(t.b - c.b), 1);
        EXPECT_LE(std::abs(t.a - c.a), 1);
      }
    }
}

TEST(Blur, ImpulseGivesKernelOuterProduct) {
  Layer l(15, 15);
  l.at(7, 7).a = 255;
  const Layer out = mt::gaussian_blur(l, 1.0);
  const mt::Kernel1D k(1.0);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 15; ++x) {
      const int dx = x - 7, dy = y - 7;
      const double v = (std::abs(dx) <= 3 && std::abs(dy) <= 3) ? 255.0 * k[dx] * k[dy] : 0.0;
      EXPECT_NEAR(out.at(x, y).a, std::floor(v + 0.5), 1) << x << ',' << y;
    }
  EXPECT_EQ(out.at(7, 7).a, static_cast<int>(std::floor(255.0 * k[0] * k[0] + 0.5)));
}

TEST(Blur, SeparableWithinOneLsbOfDirectConvolution) {
  std::mt19937 rng(21);
  const double sigmas[] = {0.5, 1.0, 1.5, 2.0, 3.0};
  for (int trial = 0; trial < 50; ++trial) {
    const Layer l = oracle::random_layer(rng, 16, 16);
    const double sigma = sigmas[trial % 5];
    const Layer a = mt::gaussian_blur(l, sigma), b = oracle::blur_2d(l, sigma);
    for (std::size_t i = 0; i < a.texels().size(); ++i) {
      const auto &p = a.texels()[i], &q = b.texels()[i];
      ASSERT_LE(std::abs(p.r - q.r), 1);
      ASSERT_LE(std::abs(p.g - q.g), 1);
      ASSERT_LE(std::abs(p.b - q.b), 1);
      ASSERT_LE(std::abs(p.a - q.a), 1);
    }
  }
}

TEST(Blur, SparseLayerMatchesDirectConvolution) {
  // Mostly transparent layers exercise the active-window path.
  std::mt19937 rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    Layer l = Layer::transparent(40, 30, Rgb{200, 90, 110});
    l = mt::fill_polygon(std::move(l), oracle::random_polygon(rng, 6, 40), Rgb{200, 90, 110}, 64 + trial);
    const Layer a = mt::gaussian_blur(l, 2.0), b = oracle::blur_2d(l, 2.0);
    for (std::size_t i = 0; i < a.texels().size(); ++i) ASSERT_LE(std::abs(a.texels()[i].a - b.texels()[i].a), 1);
  }
}

TEST(Blur, MirrorSymmetryIsExact) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Layer l = oracle::random_layer(rng, 11 + trial % 5, 9 + trial % 4);
    Layer mx(l.width(), l.height()), my(l.width(), l.height());
    for (int y = 0; y < l.height(); ++y)
      for (int x = 0; x < l.width(); ++x) {
        mx.at(l.width() - 1 - x, y) = l.at(x, y);
        my.at(x, l.height() - 1 - y) = l.at(x, y);
      }
    const double sigma = 0.5 + trial % 4;
    const Layer b = mt::gaussian_blur(l, sigma), bx = mt::gaussian_blur(mx, sigma), by = mt::gaussian_blur(my, sigma);
    for (int y = 0; y < l.height(); ++y)
      for (int x = 0; x < l.width(); ++x) {
        ASSERT_EQ(bx.at(l.width() - 1 - x, y), b.at(x, y));
        ASSERT_EQ(by.at(x, l.height() - 1 - y), b.at(x, y));
      }
  }
}
