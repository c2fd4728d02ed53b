#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "atdr/annotations.hpp"
#include "atdr/image.hpp"
#include "atdr/rng.hpp"

namespace atdr {

// Requested image-quality constraint vector for one hybrid scene.
//   rss  local contrast, Kelvin-equivalent: sqrt((muC - muF1)^2 + sigmaC^2) / nu_k
//   q_d  detectability, rss * target surface (pixels^2)
//   scr  signal-to-clutter, nu_k * rss / sigmaF
//   r_x  occluded fraction of the target surface
//   k    internal contrast, (muF1 - muC) / (nu_k * rss), in [-1, 1]
//   nu_k gray levels per Kelvin
struct SceneRecipe {
  double rss = 1.0;
  double q_d = 400.0;
  double scr = 2.0;
  double r_x = 0.0;
  double k = 0.0;
  double nu_k = 100.0;
  std::string background_id;
  std::string target_sprite_id;
  std::string occultant_sprite_id;
  double target_x = 0.0;  // center of the target footprint, pixels
  double target_y = 0.0;
  std::uint64_t seed = 0;
  int ring_width = 5;
  std::string scenario;  // free-form grouping label carried to reports

  void validate() const;
};

struct RegionStats {
  double surface = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
};

// C target, F1 local ring around C, F2 remaining background, F = F1 + F2.
struct RegionSet {
  RegionStats target;
  RegionStats local_background;
  RegionStats remaining_background;
  RegionStats background;
};

struct Sprite {
  Image intensity;
  Mask mask;
  double physical_height = 1.0;  // meters spanned by the mask's rows
  double native_aspect = 0.0;    // degrees
  std::string recognition_class;
  std::string identification_class;

  void validate() const;
};

struct LinearTransform {
  double gain = 1.0;
  double offset = 0.0;
  double operator()(double v) const { return gain * v + offset; }
};

struct QualityMetrics {
  double rss = 0.0;
  double q_d = 0.0;
  std::optional<double> scr;  // undefined when sigmaF == 0
  std::optional<double> k;    // undefined when rss == 0

  double scr_value() const;  // throws DataError when undefined
  double k_value() const;
};

RegionStats region_stats(const Image& image, const Mask& region);

// Pixels within Euclidean distance ring_width of the target, excluding the
// target itself and any excluded pixels (occultant footprint).
Mask local_ring(const Mask& target_mask, int ring_width, const Mask* exclude = nullptr);

RegionSet measure_regions(const Image& image, const Mask& target_mask, int ring_width,
                          const Mask* exclude = nullptr);

QualityMetrics compute_quality(const RegionStats& target, const RegionStats& local_background,
                               const RegionStats& background, double nu_k);

LinearTransform derive_target_transform(const SceneRecipe& recipe,
                                        const RegionStats& local_background,
                                        const RegionStats& raw_target);

LinearTransform derive_background_transform(const SceneRecipe& recipe,
                                            const RegionStats& raw_background);

// Isotropic resampling; intensity is interpolated with mask weighting and the
// mask is re-thresholded at 0.5. The result is cropped to its mask bounds.
Sprite scale_sprite(const Sprite& sprite, double factor);

// Scales the sprite so its mask surface approaches q_d / rss within 2%.
Sprite scale_target_for_qd(const Sprite& sprite, const SceneRecipe& recipe);

struct OccultantPlacement {
  int left = 0;  // occultant top-left in image coordinates
  int top = 0;
  double axis_degrees = 0.0;
  double achieved = 0.0;  // |target & occultant| / |target|
  Mask footprint;         // image-sized occultant mask
};

inline constexpr double kOcclusionTolerance = 0.02;

// Slides the occultant along an approach axis through the target centroid
// until the covered fraction is within kOcclusionTolerance of r_x. When
// `axis_degrees` is given only that axis is tried.
OccultantPlacement place_occultant(const Mask& target_mask, const Sprite& occultant, double r_x,
                                   Rng& rng, std::optional<double> axis_degrees = std::nullopt);

struct ComposeOptions {
  std::optional<double> target_scale;          // replaces Q_D-driven scaling
  std::optional<double> occultant_axis_degrees;
  std::int64_t object_id = 1;
  double max_clamped_fraction = 0.001;
};

struct ComposedScene {
  Image image;  // pre-sensor composite, continuous gray levels in [0, 65535]
  ObjectTruth truth;
  Mask target_mask;     // full footprint
  Mask visible_mask;    // footprint minus occultant
  Mask occultant_mask;  // empty grid when no occultant is used
  RegionSet regions;    // measured on the composite
  QualityMetrics measured;
  double full_surface = 0.0;
  double visible_surface = 0.0;
  double q_d_full = 0.0;  // measured rss * full surface
  LinearTransform target_transform;
  LinearTransform background_transform;
  double clamped_fraction = 0.0;
};

// Occultant placement, target placement, then gain/offset solving so the
// composite's measured RSS, SCR and K match the recipe on the visible
// target. `occultant` may be null when r_x == 0.
ComposedScene compose_scene(const SceneRecipe& recipe, const Image& background,
                            const Sprite& target, const Sprite* occultant,
                            const ComposeOptions& options = {});

}  // namespace atdr
