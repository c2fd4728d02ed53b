#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "atdr/detect_eval.hpp"
#include "atdr/error.hpp"

using namespace atdr;

namespace {

// Counts unit pixels covered by both / either integer-aligned box.
double raster_jaccard(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
  const int x0 = std::min(ax, bx), y0 = std::min(ay, by);
  const int x1 = std::max(ax + aw, bx + bw), y1 = std::max(ay + ah, by + bh);
  long inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool in_a = x >= ax && x < ax + aw && y >= ay && y < ay + ah;
      const bool in_b = x >= bx && x < bx + bw && y >= by && y < by + bh;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BoundingBox corner_box(int x, int y, int w, int h) {
  return BoundingBox::from_edges(x, y, x + w, y + h);
}

ObjectTruth truth(std::int64_t id, BoundingBox b) {
  ObjectTruth t;
  t.object_id = id;
  t.bbox = b;
  t.recognition_class = "tank";
  t.identification_class = "AMX30";
  return t;
}

Detection det(BoundingBox b, double conf = 1.0) {
  Detection d;
  d.bbox = b;
  d.confidence = conf;
  return d;
}

}  // namespace

TEST(Jaccard, WorkedExample) {
  EXPECT_DOUBLE_EQ(jaccard(BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 10, 10)), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(raster_jaccard(0, 0, 10, 10, 5, 0, 10, 10), 1.0 / 3.0);
}

TEST(Jaccard, IdenticalAndDisjoint) {
  const BoundingBox a(3, 4, 5, 6);
  EXPECT_EQ(jaccard(a, a), 1.0);
  EXPECT_EQ(jaccard(a, BoundingBox(30, 4, 5, 6)), 0.0);
  EXPECT_EQ(jaccard(BoundingBox(0, 0, 2, 2), BoundingBox(2, 0, 2, 2)), 0.0);  // touching edge
}

TEST(Jaccard, MatchesRasterOracleOverOffsetGrid) {
  for (int dx = -10; dx < 10; ++dx) {
    for (int dy = -10; dy < 10; ++dy) {
      const double analytic = jaccard(corner_box(20, 20, 8, 6), corner_box(20 + dx, 20 + dy, 5, 9));
      EXPECT_EQ(analytic, raster_jaccard(20, 20, 8, 6, 20 + dx, 20 + dy, 5, 9)) << dx << "," << dy;
    }
  }
}

TEST(Jaccard, SymmetricAndBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-20, 20), size(0.5, 15);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a(pos(rng), pos(rng), size(rng), size(rng));
    const BoundingBox b(pos(rng), pos(rng), size(rng), size(rng));
    const double j = jaccard(a, b);
    EXPECT_EQ(j, jaccard(b, a));
    EXPECT_GE(j, 0.0);
    EXPECT_LE(j, 1.0);
  }
}

TEST(Metrics, LocalizationExamples) {
  EXPECT_EQ(m1_localization(BoundingBox(5, 5, 4, 4), BoundingBox(5, 5, 10, 10)), 0.0);
  EXPECT_DOUBLE_EQ(m1_localization(BoundingBox(10, 0, 4, 4), BoundingBox(0, 0, 10, 10)), 0.5);
  EXPECT_DOUBLE_EQ(m1_localization(BoundingBox(3, 8, 4, 4), BoundingBox(0, 0, 10, 20)),
                   2.0 / std::numbers::pi * std::atan(0.4));
}

TEST(Metrics, ScaleExamples) {
  EXPECT_EQ(m2_scale(BoundingBox(0, 0, 10, 10), BoundingBox(9, 9, 5, 20)), 0.0);
  EXPECT_DOUBLE_EQ(m2_scale(BoundingBox(0, 0, 20, 10), BoundingBox(0, 0, 10, 10)), 0.5);
  EXPECT_DOUBLE_EQ(m2_scale(BoundingBox(0, 0, 15, 10), BoundingBox(0, 0, 10, 10)), 1.0 / 3.0);
}

TEST(Metrics, AspectExamples) {
  EXPECT_EQ(m3_aspect(BoundingBox(0, 0, 4, 8), BoundingBox(0, 0, 2, 4)), 0.0);
  EXPECT_DOUBLE_EQ(m3_aspect(BoundingBox(0, 0, 5, 10), BoundingBox(0, 0, 5, 5)), 0.5);
  EXPECT_DOUBLE_EQ(m3_aspect(BoundingBox(0, 0, 10, 15), BoundingBox(0, 0, 10, 12)),
                   2.0 / std::numbers::pi * std::atan(0.3));
}

TEST(Metrics, RangesZerosAndScaleInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-50, 50), size(0.5, 30), k(0.1, 10);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a(pos(rng), pos(rng), size(rng), size(rng));
    const BoundingBox b(pos(rng), pos(rng), size(rng), size(rng));
    const double m1 = m1_localization(a, b), m2 = m2_scale(a, b), m3 = m3_aspect(a, b);
    EXPECT_GE(m1, 0.0);
    EXPECT_LT(m1, 1.0);
    EXPECT_GE(m2, 0.0);
    EXPECT_LE(m2, 1.0);
    EXPECT_GE(m3, 0.0);
    EXPECT_LT(m3, 1.0);
    const double f = k(rng);
    EXPECT_NEAR(m2_scale(a.scaled(f), b.scaled(f)), m2, 1e-12);
    const BoundingBox a_grown(a.x_center(), a.y_center(), a.width() * f, a.height() * f);
    EXPECT_NEAR(m3_aspect(a_grown, b), m3, 1e-12);
    EXPECT_TRUE(is_good_detection(b, b, MatchCriterion::jaccard_default()));
    EXPECT_TRUE(is_good_detection(b, b, MatchCriterion::robin_default()));
    EXPECT_EQ(m1_localization(b, b), 0.0);
    EXPECT_EQ(m2_scale(b, b), 0.0);
    EXPECT_EQ(m3_aspect(b, b), 0.0);
  }
}

namespace {

// Horizontal offset of a 10x10 box from a 10x10 reference whose computed
// m1 equals `target` exactly, searched over neighbouring doubles.
std::optional<double> offset_for_m1(double target) {
  double x = 10.0 * std::tan(target * std::numbers::pi / 2.0);
  const BoundingBox ref(0, 0, 10, 10);
  for (int i = 0; i < 4096; ++i) {
    const double m = m1_localization(BoundingBox(x, 0, 10, 10), ref);
    if (m == target) return x;
    x = m < target ? std::nextafter(x, 1e9) : std::nextafter(x, -1e9);
  }
  return std::nullopt;
}

// Flat reference for the aspect fixtures: with both height/width ratios
// small, neighbouring heights move m3 by less than one ulp, so the exact
// threshold value is reachable.
const BoundingBox kFlatRef(0, 0, 10, 0.01);

// Box against kFlatRef with m3 == target, searched over neighbouring heights.
std::optional<BoundingBox> box_for_m3(double target) {
  double h = 10.0 * (0.001 + std::tan(target * std::numbers::pi / 2.0));
  for (int i = 0; i < 4096; ++i) {
    const double m = m3_aspect(BoundingBox(0, 0, 10, h), kFlatRef);
    if (m == target) return BoundingBox(0, 0, 10, h);
    h = m < target ? std::nextafter(h, 1e9) : std::nextafter(h, -1e9);
  }
  return std::nullopt;
}

}  // namespace

TEST(Criterion, RobinThresholdsAreInclusive) {
  const auto robin = MatchCriterion::robin_default();
  const BoundingBox ref(0, 0, 10, 10);
  // The m2 and m3 fixtures disturb each other, so each is scored with the
  // other metric left loose.
  const MatchCriterion robin_m2{.mode = MatchMode::robin, .epsilon3 = 1.0};
  const MatchCriterion robin_m3{.mode = MatchMode::robin, .epsilon2 = 1.0};

  const auto x = offset_for_m1(0.15);
  ASSERT_TRUE(x.has_value());
  EXPECT_TRUE(is_good_detection(BoundingBox(*x, 0, 10, 10), ref, robin));
  const auto x_above = offset_for_m1(0.15 + 1e-9);
  ASSERT_TRUE(x_above.has_value());
  EXPECT_FALSE(is_good_detection(BoundingBox(*x_above, 0, 10, 10), ref, robin));

  ASSERT_EQ(m2_scale(BoundingBox(0, 0, 20, 10), ref), 0.5);
  EXPECT_TRUE(is_good_detection(BoundingBox(0, 0, 20, 10), ref, robin_m2));
  // S_D = S_ref / (0.5 - 1e-9) puts m2 at 0.5 + 1e-9 up to rounding.
  const double w_above = 10.0 / (0.5 - 1e-9);
  ASSERT_GT(m2_scale(BoundingBox(0, 0, w_above, 10), ref), 0.5);
  EXPECT_FALSE(is_good_detection(BoundingBox(0, 0, w_above, 10), ref, robin_m2));

  const auto at = box_for_m3(0.15);
  ASSERT_TRUE(at.has_value());
  EXPECT_TRUE(is_good_detection(*at, kFlatRef, robin_m3));
  const auto above = box_for_m3(0.15 + 1e-9);
  ASSERT_TRUE(above.has_value());
  EXPECT_FALSE(is_good_detection(*above, kFlatRef, robin_m3));
}

TEST(Criterion, ThresholdEqualityAcceptsAndEpsilonAboveRejects) {
  // Fixtures built from values that hit the thresholds exactly: the
  // criterion is checked against the computed metric itself.
  const BoundingBox ref(0, 0, 10, 10);
  const BoundingBox z(1.0, 0, 10, 10);
  const double m1 = m1_localization(z, ref);
  const MatchCriterion at{.mode = MatchMode::robin, .epsilon1 = m1};
  EXPECT_TRUE(is_good_detection(z, ref, at));
  const MatchCriterion below{.mode = MatchMode::robin, .epsilon1 = std::nextafter(m1, 0.0)};
  EXPECT_FALSE(is_good_detection(z, ref, below));
}

TEST(Criterion, JaccardStrictlyGreater) {
  const BoundingBox a(0, 0, 10, 10), b(5, 0, 10, 10);
  EXPECT_TRUE(is_good_detection(a, b, {.epsilon0 = 0.33}));
  EXPECT_FALSE(is_good_detection(a, b, {.epsilon0 = 1.0 / 3.0}));
  EXPECT_FALSE(is_good_detection(a, BoundingBox(100, 0, 10, 10), MatchCriterion::jaccard_default()));
}

TEST(Criterion, ValidateRejectsOutOfRange) {
  EXPECT_THROW((MatchCriterion{.epsilon0 = 0.0}).validate(), UsageError);
  EXPECT_THROW((MatchCriterion{.epsilon2 = 1.5}).validate(), UsageError);
  EXPECT_NO_THROW(MatchCriterion::robin_default().validate());
}

TEST(MatchFrame, SingleExactMatch) {
  const std::vector<ObjectTruth> t{truth(1, BoundingBox(10, 10, 5, 5))};
  const std::vector<Detection> d{det(BoundingBox(10, 10, 5, 5))};
  const auto m = match_frame(t, d, MatchCriterion::jaccard_default());
  EXPECT_EQ(m.score.true_positives, 1u);
  EXPECT_EQ(m.score.false_alarms, 0u);
  EXPECT_EQ(m.score.missed, 0u);
  EXPECT_EQ(m.score.mt_count, 0u);
  EXPECT_EQ(m.score.mo_count, 0u);
}

TEST(MatchFrame, SurplusDetectionIsMultipleTracker) {
  const std::vector<ObjectTruth> t{truth(1, BoundingBox(10, 10, 10, 10))};
  const std::vector<Detection> d{det(BoundingBox(10, 10, 10, 10)), det(BoundingBox(11, 10, 10, 10))};
  const auto m = match_frame(t, d, MatchCriterion::jaccard_default());
  EXPECT_EQ(m.score.true_positives, 1u);
  EXPECT_EQ(m.score.mt_count, 1u);
  EXPECT_EQ(m.score.false_alarms, 0u);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].second, 0u);  // higher overlap wins
}

TEST(MatchFrame, LargeBoxOverTwoTargetsIsMultipleObject) {
  const std::vector<ObjectTruth> t{truth(1, corner_box(0, 0, 10, 10)), truth(2, corner_box(2, 0, 10, 10))};
  const BoundingBox cover = corner_box(1, 0, 12, 12);
  const auto c = MatchCriterion::jaccard_default();
  ASSERT_TRUE(is_good_detection(cover, t[0].bbox, c));
  ASSERT_TRUE(is_good_detection(cover, t[1].bbox, c));
  const std::vector<Detection> d{det(cover)};
  const auto m = match_frame(t, d, c);
  EXPECT_EQ(m.score.mo_count, 1u);
  EXPECT_EQ(m.score.true_positives, 1u);
  EXPECT_EQ(m.score.missed, 1u);
}

TEST(MatchFrame, TiesBreakByConfidenceThenOrder) {
  const std::vector<ObjectTruth> t{truth(1, BoundingBox(10, 10, 10, 10))};
  const std::vector<Detection> d{det(BoundingBox(11, 10, 10, 10), 0.2), det(BoundingBox(9, 10, 10, 10), 0.9)};
  auto m = match_frame(t, d, MatchCriterion::jaccard_default());
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].second, 1u);
  const std::vector<Detection> same{det(BoundingBox(11, 10, 10, 10), 0.5), det(BoundingBox(9, 10, 10, 10), 0.5)};
  m = match_frame(t, same, MatchCriterion::jaccard_default());
  EXPECT_EQ(m.pairs[0].second, 0u);
}

TEST(MatchFrame, UnmatchedAreMissesAndFalseAlarms) {
  const std::vector<ObjectTruth> t{truth(1, BoundingBox(10, 10, 10, 10))};
  const std::vector<Detection> d{det(BoundingBox(100, 100, 10, 10))};
  const auto m = match_frame(t, d, MatchCriterion::jaccard_default());
  EXPECT_EQ(m.score.true_positives, 0u);
  EXPECT_EQ(m.score.false_alarms, 1u);
  EXPECT_EQ(m.score.missed, 1u);
}

namespace {

std::vector<FrameRecord> jittered_frames(double sigma, std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<FrameRecord> frames;
  for (int f = 0; f < n; ++f) {
    FrameRecord fr;
    fr.frame_index = f;
    const BoundingBox ref(100, 100, 20, 10);
    fr.truths.push_back(truth(1, ref));
    const double jx = z(rng) * sigma, jy = z(rng) * sigma;
    fr.detections.push_back(det(BoundingBox(100 + jx * 20, 100 + jy * 10, 20, 10),
                                std::exp(-std::hypot(jx, jy))));
    if (f % 3 == 0) fr.detections.push_back(det(BoundingBox(300, 300, 5, 5), 0.3));
    frames.push_back(fr);
  }
  return frames;
}

}  // namespace

TEST(Roc, PerfectDetectionsGiveSinglePoint) {
  std::vector<FrameRecord> frames(3);
  for (int f = 0; f < 3; ++f) {
    frames[f].frame_index = f;
    frames[f].truths.push_back(truth(1, BoundingBox(10, 10, 5, 5)));
    frames[f].detections.push_back(det(BoundingBox(10, 10, 5, 5)));
  }
  const auto c = roc_curve(frames, MatchCriterion::jaccard_default());
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0].far, 0.0);
  EXPECT_EQ(c.points[0].dr, 1.0);
}

TEST(Roc, NoDetectionsGiveZeroPoint) {
  std::vector<FrameRecord> frames(2);
  frames[1].frame_index = 1;
  frames[0].truths.push_back(truth(1, BoundingBox(10, 10, 5, 5)));
  const auto c = roc_curve(frames, MatchCriterion::jaccard_default());
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0].far, 0.0);
  EXPECT_EQ(c.points[0].dr, 0.0);
}

TEST(Roc, NoTruthsAnywhereIsAnError) {
  std::vector<FrameRecord> frames(1);
  frames[0].detections.push_back(det(BoundingBox(10, 10, 5, 5)));
  EXPECT_THROW(roc_curve(frames, MatchCriterion::jaccard_default()), DataError);
}

TEST(Roc, LoosestPointMatchesBruteForceOracle) {
  const auto frames = jittered_frames(0.1, 17, 400);
  const auto c = MatchCriterion::jaccard_default();
  std::size_t pass = 0;
  for (const auto& f : frames) pass += is_good_detection(f.detections[0].bbox, f.truths[0].bbox, c);
  const auto curve = roc_curve(frames, c);
  EXPECT_DOUBLE_EQ(curve.points.back().dr, static_cast<double>(pass) / frames.size());
}

TEST(Roc, MonotoneStaircase) {
  for (double sigma : {0.05, 0.2, 0.5}) {
    const auto curve = roc_curve(jittered_frames(sigma, 23, 200), MatchCriterion::robin_default());
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      EXPECT_LT(curve.points[i].threshold, curve.points[i - 1].threshold);
      EXPECT_GE(curve.points[i].dr, curve.points[i - 1].dr);
      EXPECT_GE(curve.points[i].far, curve.points[i - 1].far);
    }
  }
}

TEST(Roc, RemovingADetectionNeverRaisesDr) {
  auto frames = jittered_frames(0.2, 29, 120);
  const auto full = roc_curve(frames, MatchCriterion::jaccard_default());
  frames[7].detections.erase(frames[7].detections.begin());
  const auto fewer = roc_curve(frames, MatchCriterion::jaccard_default());
  for (const auto& p : fewer.points) {
    // DR of the full set at the same threshold.
    double full_dr = 0.0;
    for (const auto& q : full.points) {
      if (q.threshold >= p.threshold) full_dr = q.dr;
    }
    EXPECT_LE(p.dr, full_dr + 1e-15);
  }
}

TEST(Score, TotalsAndRates) {
  const auto frames = jittered_frames(0.0, 1, 9);
  const auto r = score_detections(frames, MatchCriterion::jaccard_default());
  EXPECT_EQ(r.frame_count, 9u);
  EXPECT_EQ(r.truth_count, 9u);
  EXPECT_EQ(r.totals.true_positives, 9u);
  EXPECT_EQ(r.totals.false_alarms, 3u);
  EXPECT_DOUBLE_EQ(r.detection_rate(), 1.0);
  EXPECT_DOUBLE_EQ(r.false_alarm_rate(), 3.0 / 9.0);
  const auto high = score_detections(frames, MatchCriterion::jaccard_default(), 0.5);
  EXPECT_EQ(high.totals.false_alarms, 0u);
}
