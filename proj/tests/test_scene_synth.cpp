#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "atdr/error.hpp"
#include "atdr/rng.hpp"
#include "atdr/scene_synth.hpp"

using namespace atdr;

namespace {

Mask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.at(x, y) = 1;
  return m;
}

Mask disc_mask(int w, int h, double cx, double cy, double r) {
  Mask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r) m.at(x, y) = 1;
  return m;
}

// Brute-force ring: background pixels within Euclidean distance r of some
// target pixel.
std::size_t ring_oracle(const Mask& target, int r) {
  std::size_t n = 0;
  for (int y = 0; y < target.height(); ++y) {
    for (int x = 0; x < target.width(); ++x) {
      if (target.at(x, y)) continue;
      bool near = false;
      for (int v = 0; v < target.height() && !near; ++v)
        for (int u = 0; u < target.width() && !near; ++u)
          near = target.at(u, v) && (u - x) * (u - x) + (v - y) * (v - y) <= r * r;
      n += near;
    }
  }
  return n;
}

Image noise_image(int w, int h, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(mean, sd);
  Image img(w, h);
  for (double& v : img.pixels()) v = g(rng);
  return img;
}

Sprite textured_sprite(int w, int h, std::uint64_t seed) {
  Sprite s;
  s.mask = disc_mask(w, h, w / 2.0, h / 2.0, std::min(w, h) / 2.0);
  s.intensity = noise_image(w, h, 30000, 300, seed);
  s.physical_height = 2.5;
  s.recognition_class = "tank";
  s.identification_class = "T72";
  return s;
}

Sprite square_sprite(int side) {
  Sprite s;
  s.mask = Mask(side, side, 1);
  s.intensity = noise_image(side, side, 20000, 100, 3);
  return s;
}

}  // namespace

TEST(Regions, ConstantImage) {
  const Image img(64, 64, 1234.0);
  const auto r = measure_regions(img, rect_mask(64, 64, 20, 20, 30, 30), 5);
  for (const auto* s : {&r.target, &r.local_background, &r.remaining_background, &r.background}) {
    EXPECT_DOUBLE_EQ(s->mean, 1234.0);
    EXPECT_DOUBLE_EQ(s->std_dev, 0.0);
  }
}

TEST(Regions, RingMatchesDilationOracle) {
  const Mask m = rect_mask(64, 64, 27, 27, 37, 37);
  ASSERT_EQ(count_set(m), 100u);
  const auto r = measure_regions(Image(64, 64, 5.0), m, 5);
  EXPECT_EQ(r.target.surface, 100.0);
  EXPECT_EQ(r.local_background.surface, static_cast<double>(ring_oracle(m, 5)));
  EXPECT_EQ(r.background.surface, 64.0 * 64.0 - 100.0);
  EXPECT_EQ(r.remaining_background.surface + r.local_background.surface, r.background.surface);

  const Mask blob = disc_mask(40, 40, 17.3, 21.8, 6.2);
  for (int w : {1, 2, 3, 7}) {
    EXPECT_EQ(count_set(local_ring(blob, w)), ring_oracle(blob, w)) << w;
  }
}

TEST(Regions, TwoValuedImage) {
  const Mask m = rect_mask(64, 64, 20, 20, 30, 30);
  Image img(64, 64, 100.0);
  for (std::size_t i = 0; i < img.size(); ++i)
    if (m[i]) img[i] = 200.0;
  const auto r = measure_regions(img, m, 5);
  EXPECT_DOUBLE_EQ(r.target.mean, 200.0);
  EXPECT_DOUBLE_EQ(r.local_background.mean, 100.0);
  EXPECT_DOUBLE_EQ(r.target.std_dev, 0.0);
}

TEST(Regions, BorderTouchingMaskIsRejected) {
  EXPECT_THROW(measure_regions(Image(32, 32), rect_mask(32, 32, 0, 5, 4, 9), 3), DataError);
}

TEST(Regions, ExcludedPixelsLeaveRingAndBackground) {
  const Mask m = rect_mask(64, 64, 20, 20, 30, 30);
  const Mask ex = rect_mask(64, 64, 30, 20, 34, 30);
  const auto r = measure_regions(Image(64, 64, 1.0), m, 5, &ex);
  const auto plain = measure_regions(Image(64, 64, 1.0), m, 5);
  EXPECT_EQ(plain.local_background.surface - r.local_background.surface, 40.0);
  EXPECT_EQ(plain.background.surface - r.background.surface, 40.0);
}

TEST(Quality, WorkedExamples) {
  auto q = compute_quality({10, 100, 0}, {50, 100, 0}, {500, 100, 3}, 1.0);
  EXPECT_EQ(q.rss, 0.0);
  EXPECT_EQ(q.q_d, 0.0);
  EXPECT_FALSE(q.k.has_value());
  EXPECT_THROW(q.k_value(), DataError);

  q = compute_quality({10, 100, 0}, {50, 110, 0}, {500, 100, 3}, 1.0);
  EXPECT_DOUBLE_EQ(q.rss, 10.0);
  EXPECT_DOUBLE_EQ(*q.k, 1.0);

  q = compute_quality({50, 110, 0}, {50, 100, 0}, {500, 100, 5}, 2.0);
  EXPECT_DOUBLE_EQ(q.rss, 5.0);
  EXPECT_DOUBLE_EQ(q.q_d, 250.0);
  EXPECT_DOUBLE_EQ(*q.scr, 2.0);
  EXPECT_DOUBLE_EQ(*q.k, -1.0);

  q = compute_quality({50, 110, 0}, {50, 100, 0}, {500, 100, 0}, 2.0);
  EXPECT_FALSE(q.scr.has_value());
  EXPECT_THROW(q.scr_value(), DataError);
}

TEST(Transforms, TargetInversionWorkedExample) {
  SceneRecipe r;
  r.rss = 4;
  r.k = 0.5;
  r.nu_k = 1;
  const RegionStats ring{100, 100, 0};
  const RegionStats raw{50, 10, 2};
  const auto t = derive_target_transform(r, ring, raw);
  const double mean = t(raw.mean);
  const double sd = t.gain * raw.std_dev;
  EXPECT_DOUBLE_EQ(mean, 98.0);
  EXPECT_NEAR(sd, 4.0 * std::sqrt(0.75), 1e-12);
  const auto q = compute_quality({50, mean, sd}, ring, {500, 0, 1}, 1.0);
  EXPECT_NEAR(q.rss, 4.0, 1e-9);
  EXPECT_NEAR(*q.k, 0.5, 1e-9);
}

TEST(Transforms, TargetFixedPointAndEndpoints) {
  const RegionStats ring{100, 1000, 0};
  const RegionStats raw{50, 1100, 30};
  SceneRecipe r;
  r.nu_k = 10;
  const auto q = compute_quality(raw, ring, {500, 0, 1}, r.nu_k);
  r.rss = q.rss;
  r.k = *q.k;
  const auto t = derive_target_transform(r, ring, raw);
  EXPECT_NEAR(t.gain, 1.0, 1e-12);
  EXPECT_NEAR(t.offset, 0.0, 1e-9);

  r.k = 1.0;
  const auto flat = derive_target_transform(r, ring, raw);
  EXPECT_EQ(flat.gain, 0.0);
  EXPECT_DOUBLE_EQ(flat.offset, 1000 - r.nu_k * r.rss);
  r.k = -1.0;
  EXPECT_DOUBLE_EQ(derive_target_transform(r, ring, raw).offset, 1000 + r.nu_k * r.rss);
}

TEST(Transforms, TargetErrors) {
  SceneRecipe r;
  r.k = 1.2;
  EXPECT_THROW(derive_target_transform(r, {1, 0, 0}, {1, 0, 1}), DataError);
  r.k = 0.3;
  try {
    derive_target_transform(r, {1, 0, 0}, {1, 5, 0});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "flat sprite cannot carry internal contrast");
  }
}

TEST(Transforms, RoundTripIsIdentityOnRandomInputs) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    SceneRecipe r;
    r.rss = 0.1 + 20 * u(rng);
    r.k = 2 * u(rng) - 1;
    r.nu_k = 1 + 200 * u(rng);
    const RegionStats ring{200, 1000 + 50000 * u(rng), 10};
    const RegionStats raw{80, 50000 * u(rng), 1 + 900 * u(rng)};
    const auto t = derive_target_transform(r, ring, raw);
    const auto q = compute_quality({raw.surface, t(raw.mean), t.gain * raw.std_dev}, ring, {1, 0, 1}, r.nu_k);
    EXPECT_NEAR(q.rss / r.rss, 1.0, 1e-6);
    EXPECT_NEAR(*q.k, r.k, 1e-6);
  }
}

TEST(Transforms, BackgroundWorkedExample) {
  SceneRecipe r;
  r.nu_k = 1;
  r.rss = 5;
  r.scr = 2;
  const auto t = derive_background_transform(r, {1000, 300, 10});
  EXPECT_DOUBLE_EQ(t.gain, 0.25);
  EXPECT_DOUBLE_EQ(t(300), 300);
  r.scr = 0.5;
  EXPECT_DOUBLE_EQ(derive_background_transform(r, {1000, 300, 10}).gain, 1.0);
  EXPECT_THROW(derive_background_transform(r, {1000, 300, 0}), DataError);
  r.scr = std::numeric_limits<double>::infinity();
  EXPECT_THROW(derive_background_transform(r, {1000, 300, 10}), DataError);
}

TEST(Scaling, WorkedExample) {
  SceneRecipe r;
  r.rss = 2;
  r.q_d = 1600;
  const auto s = scale_target_for_qd(square_sprite(20), r);
  const auto n = count_set(s.mask);
  EXPECT_GE(n, 784u);
  EXPECT_LE(n, 816u);
  EXPECT_NEAR(s.mask.width(), 20 * std::sqrt(2.0), 1.5);
}

TEST(Scaling, FixedPointAndDoubling) {
  const Sprite sq = square_sprite(12);
  SceneRecipe r;
  r.rss = 3;
  r.q_d = 3 * 144;
  const auto same = scale_target_for_qd(sq, r);
  EXPECT_EQ(same.mask, sq.mask);
  EXPECT_EQ(same.intensity, sq.intensity);
  r.q_d = 4 * 3 * 144;
  const auto twice = scale_target_for_qd(sq, r);
  EXPECT_EQ(twice.mask.width(), 24);
  EXPECT_EQ(twice.mask.height(), 24);
}

TEST(Scaling, SurfaceAlwaysWithinTwoPercent) {
  const Sprite blob = textured_sprite(31, 17, 9);
  Sprite box = square_sprite(15);
  box.mask = rect_mask(15, 15, 0, 0, 15, 6);
  box.mask = crop(box.mask, PixelRect{0, 0, 15, 6});
  box.intensity = crop(box.intensity, PixelRect{0, 0, 15, 6});
  for (const Sprite* s : std::initializer_list<const Sprite*>{&blob, &box}) {
    for (double surface = 20; surface < 3000; surface *= 1.13) {
      SceneRecipe r;
      r.rss = 1.5;
      r.q_d = surface * r.rss;
      const auto out = scale_target_for_qd(*s, r);
      EXPECT_NEAR(static_cast<double>(count_set(out.mask)), surface, 0.02 * surface);
    }
  }
}

TEST(Scaling, BelowMinimumSize) {
  SceneRecipe r;
  r.rss = 2;
  r.q_d = 16;
  try {
    scale_target_for_qd(square_sprite(10), r);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "target below minimum resolvable size");
  }
}

TEST(Occultant, ZeroRatioIsDisjoint) {
  const Mask target = disc_mask(100, 100, 50, 50, 10);
  Sprite occ = textured_sprite(20, 20, 4);
  Rng rng(1);
  const auto p = place_occultant(target, occ, 0.0, rng);
  EXPECT_EQ(p.achieved, 0.0);
  for (std::size_t i = 0; i < target.size(); ++i) EXPECT_FALSE(target[i] && p.footprint[i]);
}

TEST(Occultant, SelfShapedOccultantReachesHalf) {
  const Mask target = rect_mask(100, 100, 40, 40, 60, 56);
  Sprite occ = square_sprite(20);
  occ.mask = rect_mask(20, 16, 0, 0, 20, 16);
  occ.intensity = Image(20, 16, 500.0);
  Rng rng(2);
  const auto p = place_occultant(target, occ, 0.5, rng);
  EXPECT_NEAR(p.achieved, 0.5, kOcclusionTolerance);
  std::size_t both = 0;
  for (std::size_t i = 0; i < target.size(); ++i) both += target[i] && p.footprint[i];
  EXPECT_DOUBLE_EQ(p.achieved, static_cast<double>(both) / count_set(target));
}

TEST(Occultant, OverlapMonotoneAlongAxis) {
  // Sliding a convex occultant away from the centroid does not increase the
  // covered fraction beyond lattice rounding, so the line search can stop
  // at the first undershoot.
  const Mask target = disc_mask(120, 120, 60, 60, 15);
  const Sprite occ = textured_sprite(25, 25, 5);
  for (double axis : {0.0, 37.0, 90.0, 211.0}) {
    double prev = 1.0;
    for (double d = 0; d < 45; d += 1.0) {
      const double ux = std::cos(axis * std::numbers::pi / 180), uy = std::sin(axis * std::numbers::pi / 180);
      const int left = static_cast<int>(std::lround(60 + d * ux - 12.5));
      const int top = static_cast<int>(std::lround(60 + d * uy - 12.5));
      std::size_t both = 0;
      for (int y = 0; y < 25; ++y)
        for (int x = 0; x < 25; ++x)
          if (occ.mask.at(x, y) && target.contains(left + x, top + y) && target.at(left + x, top + y)) ++both;
      const double frac = static_cast<double>(both) / count_set(target);
      EXPECT_LE(frac, prev + 0.02) << axis << " " << d;
      prev = frac;
    }
  }
}

TEST(Occultant, UnreachableRatio) {
  const Mask target = rect_mask(100, 100, 40, 40, 60, 60);
  Sprite occ = square_sprite(14);  // 196 px, about half of 400
  Rng rng(4);
  EXPECT_THROW(place_occultant(target, occ, 0.9, rng), DataError);
}

namespace {

SceneRecipe base_recipe() {
  SceneRecipe r;
  r.rss = 2;
  r.q_d = 2 * 300;
  r.scr = 3;
  r.k = 0.2;
  r.nu_k = 100;
  r.target_x = 64;
  r.target_y = 64;
  r.seed = 77;
  return r;
}

}  // namespace

TEST(Compose, RoundTripOnSeveralRecipes) {
  const Image bg = noise_image(128, 128, 30000, 400, 1);
  const Sprite target = textured_sprite(24, 14, 2);
  const Sprite occ = textured_sprite(22, 22, 3);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 25; ++i) {
    SceneRecipe r = base_recipe();
    r.rss = 0.5 + 4 * u(rng);
    r.q_d = r.rss * (150 + 400 * u(rng));
    r.scr = 0.5 + 5 * u(rng);
    r.k = 1.8 * u(rng) - 0.9;
    r.r_x = i % 3 == 0 ? 0.0 : 0.4 * u(rng);
    r.seed = i;
    const auto scene = compose_scene(r, bg, target, r.r_x > 0 ? &occ : nullptr);
    EXPECT_NEAR(scene.measured.rss / r.rss, 1.0, 0.02);
    EXPECT_NEAR(scene.measured.scr_value() / r.scr, 1.0, 0.02);
    EXPECT_NEAR(scene.measured.k_value(), r.k, 0.02 * std::abs(r.k) + 1e-6);
    EXPECT_NEAR(scene.q_d_full / r.q_d, 1.0, 0.04);
    EXPECT_NEAR(scene.truth.occlusion_fraction, r.r_x, 0.02);
    EXPECT_EQ(scene.truth.identification_class, "T72");
  }
}

TEST(Compose, FixedPointIsNaivePaste) {
  const Image bg = noise_image(96, 96, 30000, 400, 5);
  const Sprite target = textured_sprite(20, 12, 6);
  SceneRecipe r = base_recipe();
  r.target_x = 48;
  r.target_y = 48;
  // Measure the raw statistics of a naive paste and request exactly them.
  const int left = static_cast<int>(std::lround(48 - 10.0)), top = static_cast<int>(std::lround(48 - 6.0));
  Mask placed(96, 96);
  Image naive = bg;
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 20; ++x)
      if (target.mask.at(x, y)) {
        placed.at(left + x, top + y) = 1;
        naive.at(left + x, top + y) = target.intensity.at(x, y);
      }
  const auto regions = measure_regions(naive, placed, r.ring_width);
  const auto q = compute_quality(regions.target, regions.local_background, regions.background, r.nu_k);
  r.rss = q.rss;
  r.q_d = q.q_d;
  r.scr = *q.scr;
  r.k = *q.k;
  const auto scene = compose_scene(r, bg, target, nullptr);
  EXPECT_NEAR(scene.target_transform.gain, 1.0, 1e-9);
  EXPECT_NEAR(scene.target_transform.offset, 0.0, 1e-5);
  EXPECT_NEAR(scene.background_transform.gain, 1.0, 1e-9);
  EXPECT_NEAR(scene.background_transform.offset, 0.0, 1e-5);
  for (std::size_t i = 0; i < naive.size(); ++i) ASSERT_NEAR(scene.image[i], naive[i], 1e-6);
}

TEST(Compose, OcclusionThirtyPercent) {
  const Image bg = noise_image(128, 128, 30000, 400, 7);
  SceneRecipe r = base_recipe();
  r.r_x = 0.3;
  const Sprite target = textured_sprite(24, 14, 8);
  const Sprite occ = textured_sprite(20, 20, 9);
  const auto scene = compose_scene(r, bg, target, &occ);
  EXPECT_GE(scene.truth.occlusion_fraction, 0.28);
  EXPECT_LE(scene.truth.occlusion_fraction, 0.32);
  // The truth box is the tight box of the full footprint.
  const auto b = *mask_bounds(scene.target_mask);
  EXPECT_EQ(scene.truth.bbox, BoundingBox::from_edges(b.x0, b.y0, b.x1, b.y1));
  EXPECT_LT(scene.visible_surface, scene.full_surface);
}

TEST(Compose, DeterministicForSameSeed) {
  const Image bg = noise_image(128, 128, 30000, 400, 7);
  const Sprite t = textured_sprite(24, 14, 8), o = textured_sprite(20, 20, 9);
  SceneRecipe r = base_recipe();
  r.r_x = 0.2;
  const auto a = compose_scene(r, bg, t, &o);
  const auto b = compose_scene(r, bg, t, &o);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.occultant_mask, b.occultant_mask);
}

TEST(Compose, RssMonotone) {
  const Image bg = noise_image(128, 128, 30000, 400, 10);
  const Sprite t = textured_sprite(24, 14, 11);
  double prev = -1.0;
  for (double rss : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    SceneRecipe r = base_recipe();
    r.rss = rss;
    r.q_d = rss * 300;
    const auto s = compose_scene(r, bg, t, nullptr);
    const double d = s.regions.target.mean - s.regions.local_background.mean;
    const double energy = d * d + s.regions.target.std_dev * s.regions.target.std_dev;
    EXPECT_GT(energy, prev);
    prev = energy;
  }
}

TEST(Compose, Errors) {
  const Image bg = noise_image(64, 64, 30000, 400, 12);
  const Sprite t = textured_sprite(16, 10, 13);
  SceneRecipe r = base_recipe();
  r.target_x = 32;
  r.target_y = 32;
  r.q_d = 2 * 120;
  r.k = 1.5;
  EXPECT_THROW(compose_scene(r, bg, t, nullptr), DataError);
  r.k = 0;
  r.r_x = 0.2;
  EXPECT_THROW(compose_scene(r, bg, t, nullptr), DataError);  // no occultant
  r.r_x = 0;
  r.target_x = 2;
  EXPECT_THROW(compose_scene(r, bg, t, nullptr), DataError);  // off frame
  r.target_x = 32;
  r.rss = 400;  // contrast of 40000 gray levels leaves the 16-bit range
  r.q_d = 400 * 120;
  try {
    compose_scene(r, bg, t, nullptr);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("out of gamut"), std::string::npos);
  }
}
