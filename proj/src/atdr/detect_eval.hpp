#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "atdr/annotations.hpp"

namespace atdr {

enum class MatchMode { jaccard, robin };

// Validity rule for a (detected, reference) box pair. The defaults are the
// published operating thresholds.
struct MatchCriterion {
  MatchMode mode = MatchMode::jaccard;
  double epsilon0 = 0.5;   // jaccard > epsilon0
  double epsilon1 = 0.15;  // localization m1 <= epsilon1
  double epsilon2 = 0.5;   // scale m2 <= epsilon2
  double epsilon3 = 0.15;  // aspect m3 <= epsilon3

  static MatchCriterion jaccard_default() { return {}; }
  static MatchCriterion robin_default() { return {.mode = MatchMode::robin}; }

  // Throws UsageError unless every epsilon is in (0, 1].
  void validate() const;
};

double jaccard(const BoundingBox& z, const BoundingBox& z_ref);
double m1_localization(const BoundingBox& z, const BoundingBox& z_ref);
double m2_scale(const BoundingBox& z, const BoundingBox& z_ref);
double m3_aspect(const BoundingBox& z, const BoundingBox& z_ref);

bool is_good_detection(const BoundingBox& z, const BoundingBox& z_ref, const MatchCriterion& c);

struct FrameDetectionScore {
  std::size_t true_positives = 0;
  std::size_t false_alarms = 0;
  std::size_t missed = 0;
  std::size_t mt_count = 0;
  std::size_t mo_count = 0;

  FrameDetectionScore& operator+=(const FrameDetectionScore& o);
};

struct FrameMatch {
  // (truth index, detection index) pairs, in assignment order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_truths;
  std::vector<std::size_t> false_alarm_detections;
  std::vector<std::size_t> mt_detections;
  std::vector<std::size_t> mo_detections;
  FrameDetectionScore score;
};

// Greedy one-to-one assignment over pairs passing the criterion, ordered by
// descending Jaccard, then descending confidence, then detection order.
// Surplus detections valid against an already matched truth count as MT and
// are not false alarms.
FrameMatch match_frame(std::span<const ObjectTruth> truths, std::span<const Detection> detections,
                       const MatchCriterion& criterion);

struct RocPoint {
  double threshold = std::numeric_limits<double>::infinity();
  double far = 0.0;  // false alarms per frame
  double dr = 0.0;   // matched truths / truths
};

struct RocCurve {
  std::vector<RocPoint> points;  // decreasing threshold
};

// Sweeps the distinct detection confidences from high to low, keeping
// detections with conf >= threshold and re-matching every frame.
RocCurve roc_curve(std::span<const FrameRecord> frames, const MatchCriterion& criterion);

struct DetectionReport {
  std::vector<FrameDetectionScore> per_frame;
  FrameDetectionScore totals;
  std::size_t truth_count = 0;
  std::size_t frame_count = 0;
  double detection_rate() const;
  double false_alarm_rate() const;
};

DetectionReport score_detections(std::span<const FrameRecord> frames,
                                 const MatchCriterion& criterion,
                                 double min_confidence = -std::numeric_limits<double>::infinity());

}  // namespace atdr
