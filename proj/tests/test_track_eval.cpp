#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "atdr/track_eval.hpp"

using namespace atdr;

namespace {

// Per frame: list of (object id, x position, tracker id or -1 for an
// untracked detection, 0 for no detection).
struct Obs {
  std::int64_t object;
  double x;
  std::int64_t tracker;
};

std::vector<FrameRecord> build(const std::vector<std::vector<Obs>>& plan) {
  std::vector<FrameRecord> frames;
  for (std::size_t f = 0; f < plan.size(); ++f) {
    FrameRecord fr;
    fr.frame_index = static_cast<std::int64_t>(f);
    for (const auto& o : plan[f]) {
      ObjectTruth t;
      t.object_id = o.object;
      t.bbox = BoundingBox(o.x, 50, 10, 10);
      fr.truths.push_back(t);
      if (o.tracker == 0) continue;
      Detection d;
      d.bbox = t.bbox;
      if (o.tracker > 0) d.tracker_id = o.tracker;
      fr.detections.push_back(d);
    }
    frames.push_back(fr);
  }
  return frames;
}

// The identity-continuity scenario with three targets and three trackers:
// target 1 is followed by tracker 1, lost, and picked up by a new tracker 2;
// tracker 3 starts on target 2 and jumps to target 3 where they cross.
std::vector<FrameRecord> three_target_scenario() {
  return build({
      {{1, 20, 1}, {2, 100, 3}, {3, 180, 0}},
      {{1, 25, 1}, {2, 110, 3}, {3, 170, 0}},
      {{1, 30, 0}, {2, 120, 0}, {3, 160, 3}},
      {{1, 35, 2}, {2, 130, 0}, {3, 150, 3}},
      {{1, 40, 2}, {2, 140, 0}, {3, 140 + 30, 3}},
  });
}

}  // namespace

TEST(Track, SteadyTrackerHasNoEvents) {
  const auto s = score_tracks(build({{{1, 20, 1}}, {{1, 22, 1}}, {{1, 24, 0}}, {{1, 26, 1}}}),
                              MatchCriterion::jaccard_default());
  EXPECT_EQ(s.fit_count, 0u);
  EXPECT_EQ(s.fio_count, 0u);
  EXPECT_EQ(s.per_object_tracker_history.at(1), (std::vector<std::int64_t>{1}));
}

TEST(Track, ThreeTargetScenario) {
  const auto s = score_tracks(three_target_scenario(), MatchCriterion::jaccard_default());
  EXPECT_EQ(s.fit_count, 1u);
  EXPECT_EQ(s.fio_count, 1u);
  EXPECT_EQ(s.per_object_tracker_history.at(1), (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(s.per_tracker_object_history.at(3), (std::vector<std::int64_t>{2, 3}));
}

TEST(Track, RevisitedTrackerCountsEachChange) {
  const auto s = score_tracks(build({{{1, 20, 1}}, {{1, 20, 2}}, {{1, 20, 1}}}),
                              MatchCriterion::jaccard_default());
  EXPECT_EQ(s.fit_count, 2u);
  EXPECT_EQ(s.per_object_tracker_history.at(1), (std::vector<std::int64_t>{1, 2, 1}));
}

TEST(Track, UntrackedAndUnmatchedDetectionsContributeNothing) {
  auto frames = build({{{1, 20, 1}}, {{1, 20, -1}}, {{1, 20, 1}}});
  Detection stray;
  stray.bbox = BoundingBox(300, 300, 5, 5);
  stray.tracker_id = 9;
  frames[1].detections.push_back(stray);
  const auto s = score_tracks(frames, MatchCriterion::jaccard_default());
  EXPECT_EQ(s.fit_count, 0u);
  EXPECT_EQ(s.fio_count, 0u);
  EXPECT_EQ(s.per_tracker_object_history.count(9), 0u);
}

TEST(Track, EmptyTimelineYieldsZero) {
  const auto s = score_timeline({});
  EXPECT_EQ(s.fit_count, 0u);
  EXPECT_EQ(s.fio_count, 0u);
}

TEST(Track, CountsMatchHistoryFormula) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    AssociationTimeline tl;
    for (int f = 0; f < 30; ++f) {
      FrameAssociations fa;
      fa.frame_index = f;
      std::vector<std::int64_t> used;
      for (std::int64_t obj = 1; obj <= 3; ++obj) {
        if (rng() % 4 == 0) continue;
        const std::int64_t tr = 1 + static_cast<std::int64_t>(rng() % 5);
        if (std::find(used.begin(), used.end(), tr) != used.end()) continue;
        used.push_back(tr);
        fa.pairs.emplace_back(obj, tr);
      }
      tl.push_back(fa);
    }
    const auto s = score_timeline(tl);
    std::size_t fit = 0, fio = 0;
    for (const auto& [obj, h] : s.per_object_tracker_history) fit += h.size() - 1;
    for (const auto& [tr, h] : s.per_tracker_object_history) fio += h.size() - 1;
    EXPECT_EQ(s.fit_count, fit);
    EXPECT_EQ(s.fio_count, fio);
    for (const auto& [obj, h] : s.per_object_tracker_history) {
      for (std::size_t i = 1; i < h.size(); ++i) EXPECT_NE(h[i], h[i - 1]);
    }

    // Injective relabelling of tracker ids.
    AssociationTimeline relabelled = tl;
    for (auto& fa : relabelled)
      for (auto& p : fa.pairs) p.second = 1000 - 7 * p.second;
    const auto r = score_timeline(relabelled);
    EXPECT_EQ(r.fit_count, s.fit_count);
    EXPECT_EQ(r.fio_count, s.fio_count);

    // Self-concatenation doubles the counts plus at most one seam event
    // per history that already changed.
    AssociationTimeline doubled = tl;
    for (auto fa : tl) {
      fa.frame_index += 30;
      doubled.push_back(fa);
    }
    const auto d = score_timeline(doubled);
    std::size_t changed_objects = 0, changed_trackers = 0;
    for (const auto& [obj, h] : s.per_object_tracker_history) changed_objects += h.size() > 1;
    for (const auto& [tr, h] : s.per_tracker_object_history) changed_trackers += h.size() > 1;
    EXPECT_GE(d.fit_count, 2 * s.fit_count);
    EXPECT_LE(d.fit_count, 2 * s.fit_count + changed_objects);
    EXPECT_GE(d.fio_count, 2 * s.fio_count);
    EXPECT_LE(d.fio_count, 2 * s.fio_count + changed_trackers);
  }
}

TEST(Track, HasTrackerIds) {
  EXPECT_TRUE(has_tracker_ids(build({{{1, 20, 1}}})));
  EXPECT_FALSE(has_tracker_ids(build({{{1, 20, -1}}})));
}

TEST(Track, JsonShape) {
  const auto s = score_tracks(three_target_scenario(), MatchCriterion::jaccard_default());
  const std::string j = s.to_json();
  EXPECT_NE(j.find("\"fit\": 1"), std::string::npos);
  EXPECT_NE(j.find("\"fio\": 1"), std::string::npos);
  EXPECT_NE(j.find("\"objects\""), std::string::npos);
  EXPECT_NE(j.find("\"trackers\""), std::string::npos);
}
