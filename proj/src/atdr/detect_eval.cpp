#include "atdr/detect_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "atdr/error.hpp"

namespace atdr {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

// Interval overlap from centers and widths; exact for identical intervals.
double overlap_1d(double c_a, double w_a, double c_b, double w_b) {
  return std::min(std::min(w_a, w_b), std::max(0.0, 0.5 * (w_a + w_b) - std::abs(c_a - c_b)));
}

struct Candidate {
  double overlap;
  double confidence;
  std::size_t detection;
  std::size_t truth;
};

}  // namespace

void MatchCriterion::validate() const {
  for (double eps : {epsilon0, epsilon1, epsilon2, epsilon3}) {
    if (!(eps > 0.0 && eps <= 1.0)) throw UsageError("criterion thresholds must lie in (0, 1]");
  }
}

double jaccard(const BoundingBox& z, const BoundingBox& z_ref) {
  const double inter = overlap_1d(z.x_center(), z.width(), z_ref.x_center(), z_ref.width()) *
                       overlap_1d(z.y_center(), z.height(), z_ref.y_center(), z_ref.height());
  if (inter <= 0.0) return 0.0;
  const double uni = z.surface() + z_ref.surface() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double m1_localization(const BoundingBox& z, const BoundingBox& z_ref) {
  const double dx = std::abs(z.x_center() - z_ref.x_center()) / z_ref.width();
  const double dy = std::abs(z.y_center() - z_ref.y_center()) / z_ref.height();
  return kTwoOverPi * std::atan(std::max(dx, dy));
}

double m2_scale(const BoundingBox& z, const BoundingBox& z_ref) {
  const double s_d = z.surface();
  const double s_ref = z_ref.surface();
  return std::abs(s_d - s_ref) / std::max(s_d, s_ref);
}

double m3_aspect(const BoundingBox& z, const BoundingBox& z_ref) {
  return kTwoOverPi * std::atan(std::abs(z.height() / z.width() - z_ref.height() / z_ref.width()));
}

bool is_good_detection(const BoundingBox& z, const BoundingBox& z_ref, const MatchCriterion& c) {
  if (c.mode == MatchMode::jaccard) return jaccard(z, z_ref) > c.epsilon0;
  return m1_localization(z, z_ref) <= c.epsilon1 && m2_scale(z, z_ref) <= c.epsilon2 &&
         m3_aspect(z, z_ref) <= c.epsilon3;
}

FrameDetectionScore& FrameDetectionScore::operator+=(const FrameDetectionScore& o) {
  true_positives += o.true_positives;
  false_alarms += o.false_alarms;
  missed += o.missed;
  mt_count += o.mt_count;
  mo_count += o.mo_count;
  return *this;
}

FrameMatch match_frame(std::span<const ObjectTruth> truths, std::span<const Detection> detections,
                       const MatchCriterion& criterion) {
  // valid[d][t]: detection d passes the criterion against truth t.
  std::vector<std::vector<bool>> valid(detections.size(), std::vector<bool>(truths.size()));
  std::vector<Candidate> candidates;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (!is_good_detection(detections[d].bbox, truths[t].bbox, criterion)) continue;
      valid[d][t] = true;
      candidates.push_back(
          {jaccard(detections[d].bbox, truths[t].bbox), detections[d].confidence, d, t});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.detection != b.detection) return a.detection < b.detection;
    return a.truth < b.truth;
  });

  FrameMatch m;
  std::vector<bool> truth_used(truths.size());
  std::vector<bool> det_used(detections.size());
  for (const auto& c : candidates) {
    if (truth_used[c.truth] || det_used[c.detection]) continue;
    truth_used[c.truth] = true;
    det_used[c.detection] = true;
    m.pairs.emplace_back(c.truth, c.detection);
  }

  for (std::size_t t = 0; t < truths.size(); ++t) {
    if (!truth_used[t]) m.unmatched_truths.push_back(t);
  }
  for (std::size_t d = 0; d < detections.size(); ++d) {
    const auto passes = static_cast<std::size_t>(std::count(valid[d].begin(), valid[d].end(), true));
    if (passes >= 2) m.mo_detections.push_back(d);
    if (det_used[d]) continue;
    bool surplus = false;
    for (std::size_t t = 0; t < truths.size() && !surplus; ++t) {
      surplus = valid[d][t] && truth_used[t];
    }
    (surplus ? m.mt_detections : m.false_alarm_detections).push_back(d);
  }

  m.score.true_positives = m.pairs.size();
  m.score.missed = m.unmatched_truths.size();
  m.score.false_alarms = m.false_alarm_detections.size();
  m.score.mt_count = m.mt_detections.size();
  m.score.mo_count = m.mo_detections.size();
  return m;
}

RocCurve roc_curve(std::span<const FrameRecord> frames, const MatchCriterion& criterion) {
  std::size_t truth_total = 0;
  for (const auto& f : frames) truth_total += f.truths.size();
  if (frames.empty()) throw DataError("ROC undefined: dataset has no frames");
  if (truth_total == 0) throw DataError("ROC undefined: dataset has no ground-truth objects");

  // A frame's match result only changes when the threshold crosses one of
  // its own confidences, so each frame is re-matched once per distinct
  // confidence and the changes are accumulated globally.
  struct Delta {
    long long tp = 0;
    long long fa = 0;
  };
  std::map<double, Delta, std::greater<>> deltas;
  std::vector<Detection> kept;
  for (const auto& f : frames) {
    std::vector<double> levels;
    for (const auto& d : f.detections) levels.push_back(d.confidence);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    long long prev_tp = 0;
    long long prev_fa = 0;
    for (double level : levels) {
      kept.clear();
      for (const auto& d : f.detections) {
        if (d.confidence >= level) kept.push_back(d);
      }
      const auto s = match_frame(f.truths, kept, criterion).score;
      auto& delta = deltas[level];
      delta.tp += static_cast<long long>(s.true_positives) - prev_tp;
      delta.fa += static_cast<long long>(s.false_alarms) - prev_fa;
      prev_tp = static_cast<long long>(s.true_positives);
      prev_fa = static_cast<long long>(s.false_alarms);
    }
  }

  RocCurve curve;
  const double n_frames = static_cast<double>(frames.size());
  const double n_truths = static_cast<double>(truth_total);
  if (deltas.empty()) {
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    return curve;
  }
  long long tp = 0;
  long long fa = 0;
  for (const auto& [level, delta] : deltas) {
    tp += delta.tp;
    fa += delta.fa;
    curve.points.push_back({level, static_cast<double>(fa) / n_frames,
                            static_cast<double>(tp) / n_truths});
  }
  return curve;
}

double DetectionReport::detection_rate() const {
  return truth_count == 0 ? 0.0
                          : static_cast<double>(totals.true_positives) /
                                static_cast<double>(truth_count);
}

double DetectionReport::false_alarm_rate() const {
  return frame_count == 0 ? 0.0
                          : static_cast<double>(totals.false_alarms) /
                                static_cast<double>(frame_count);
}

DetectionReport score_detections(std::span<const FrameRecord> frames,
                                 const MatchCriterion& criterion, double min_confidence) {
  DetectionReport report;
  report.frame_count = frames.size();
  std::vector<Detection> kept;
  for (const auto& f : frames) {
    kept.clear();
    for (const auto& d : f.detections) {
      if (d.confidence >= min_confidence) kept.push_back(d);
    }
    auto s = match_frame(f.truths, kept, criterion).score;
    report.per_frame.push_back(s);
    report.totals += s;
    report.truth_count += f.truths.size();
  }
  return report;
}

}  // namespace atdr
