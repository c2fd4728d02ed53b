#include "atdr/track_eval.hpp"

#include <algorithm>

#include "json.hpp"

namespace atdr {

namespace {

void append_compressed(std::vector<std::int64_t>& history, std::int64_t id) {
  if (history.empty() || history.back() != id) history.push_back(id);
}

std::size_t changes(const std::map<std::int64_t, std::vector<std::int64_t>>& histories) {
  std::size_t n = 0;
  for (const auto& [id, h] : histories) n += h.empty() ? 0 : h.size() - 1;
  return n;
}

}  // namespace

AssociationTimeline build_timeline(std::span<const FrameRecord> frames,
                                   const MatchCriterion& criterion) {
  AssociationTimeline timeline;
  timeline.reserve(frames.size());
  for (const auto& frame : frames) {
    FrameAssociations fa{frame.frame_index, {}};
    for (auto [t, d] : match_frame(frame.truths, frame.detections, criterion).pairs) {
      if (const auto& tracker = frame.detections[d].tracker_id) {
        fa.pairs.emplace_back(frame.truths[t].object_id, *tracker);
      }
    }
    // Deterministic order inside a frame; the pairs form a partial bijection.
    std::sort(fa.pairs.begin(), fa.pairs.end());
    timeline.push_back(std::move(fa));
  }
  return timeline;
}

TrackScore score_timeline(const AssociationTimeline& timeline) {
  TrackScore s;
  for (const auto& frame : timeline) {
    for (auto [object, tracker] : frame.pairs) {
      append_compressed(s.per_object_tracker_history[object], tracker);
      append_compressed(s.per_tracker_object_history[tracker], object);
    }
  }
  s.fit_count = changes(s.per_object_tracker_history);
  s.fio_count = changes(s.per_tracker_object_history);
  return s;
}

TrackScore score_tracks(std::span<const FrameRecord> frames, const MatchCriterion& criterion) {
  return score_timeline(build_timeline(frames, criterion));
}

bool has_tracker_ids(std::span<const FrameRecord> frames) {
  for (const auto& f : frames) {
    for (const auto& d : f.detections) {
      if (d.tracker_id) return true;
    }
  }
  return false;
}

std::string TrackScore::to_json() const {
  nlohmann::ordered_json j;
  j["fit"] = fit_count;
  j["fio"] = fio_count;
  nlohmann::ordered_json objects = nlohmann::ordered_json::object();
  for (const auto& [id, h] : per_object_tracker_history) objects[std::to_string(id)] = h;
  nlohmann::ordered_json trackers = nlohmann::ordered_json::object();
  for (const auto& [id, h] : per_tracker_object_history) trackers[std::to_string(id)] = h;
  j["objects"] = std::move(objects);
  j["trackers"] = std::move(trackers);
  return j.dump(2);
}

}  // namespace atdr
