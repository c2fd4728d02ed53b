#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "atdr/annotations.hpp"
#include "atdr/detect_eval.hpp"

namespace atdr {

struct FrameAssociations {
  std::int64_t frame_index = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;  // (object_id, tracker_id)
};

using AssociationTimeline = std::vector<FrameAssociations>;

// FIT: an object's tracker identity changed. FIO: a tracker moved to
// another object. Histories hold distinct ids with consecutive repeats
// compressed, so gaps alone never create events.
struct TrackScore {
  std::size_t fit_count = 0;
  std::size_t fio_count = 0;
  std::map<std::int64_t, std::vector<std::int64_t>> per_object_tracker_history;
  std::map<std::int64_t, std::vector<std::int64_t>> per_tracker_object_history;

  std::string to_json() const;
};

AssociationTimeline build_timeline(std::span<const FrameRecord> frames,
                                   const MatchCriterion& criterion);
TrackScore score_timeline(const AssociationTimeline& timeline);
TrackScore score_tracks(std::span<const FrameRecord> frames, const MatchCriterion& criterion);

// True when any detection in the dataset carries a tracker id.
bool has_tracker_ids(std::span<const FrameRecord> frames);

}  // namespace atdr
