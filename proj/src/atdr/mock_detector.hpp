#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "atdr/annotations.hpp"
#include "atdr/image.hpp"

namespace atdr {

// Synthetic detector that perturbs ground truth into detections.
struct MockConfig {
  double jitter_sigma = 0.0;  // center std as a fraction of W and H; log-size std
  double miss_rate = 0.0;
  double clutter_rate = 0.0;  // Poisson mean of clutter boxes per frame
  double classify_accuracy = 1.0;
  double track_switch_rate = 0.0;  // per object and frame after first sighting
  std::uint64_t seed = 0;
  int image_width = 640;  // used for clutter when the frame image is unavailable
  int image_height = 512;
  // Scales confidence and jitter by how visible the target is: the
  // unoccluded fraction times scr / (scr + scr_half), with scr measured
  // from the frame image around the truth box.
  bool quality_aware = false;
  double scr_half = 1.0;

  void validate() const;
};

// Local signal-to-clutter estimate: contrast of the box against a ring of
// `ring` pixels around it, over the deviation of the rest of the image.
double estimate_scr(const Image& image, const BoundingBox& box, int ring = 5);

// Truths are copied through; any existing detections are replaced.
// `image_root` resolves relative image paths (used for clutter extent and
// quality-aware scoring).
std::vector<FrameRecord> mock_detect(const std::vector<FrameRecord>& frames, const MockConfig& cfg,
                                     const ClassTaxonomy* taxonomy = nullptr,
                                     const std::filesystem::path& image_root = {});

}  // namespace atdr
