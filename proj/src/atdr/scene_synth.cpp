#include "atdr/scene_synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "atdr/error.hpp"

namespace atdr {

namespace {

constexpr double kMinTargetSurface = 9.0;
constexpr double kSurfaceTolerance = 0.02;

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

void require_same_shape(const Image& image, const Mask& mask, const char* what) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw DataError(std::string(what) + ": mask and image dimensions differ");
  }
}

bool touches_border(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  for (int x = 0; x < w; ++x) {
    if (mask.at(x, 0) || mask.at(x, h - 1)) return true;
  }
  for (int y = 0; y < h; ++y) {
    if (mask.at(0, y) || mask.at(w - 1, y)) return true;
  }
  return false;
}

struct Centroid {
  double x = 0.0;
  double y = 0.0;
};

Centroid centroid(const Mask& mask) {
  double sx = 0.0;
  double sy = 0.0;
  double n = 0.0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      sx += x + 0.5;
      sy += y + 0.5;
      n += 1.0;
    }
  }
  return {sx / n, sy / n};
}

std::size_t covered(const Mask& target, const Mask& occ, int left, int top) {
  std::size_t n = 0;
  for (int y = 0; y < occ.height(); ++y) {
    const int iy = top + y;
    if (iy < 0 || iy >= target.height()) continue;
    for (int x = 0; x < occ.width(); ++x) {
      const int ix = left + x;
      if (ix < 0 || ix >= target.width()) continue;
      if (occ.at(x, y) && target.at(ix, iy)) ++n;
    }
  }
  return n;
}

Mask stamp(const Mask& sprite_mask, int left, int top, int width, int height) {
  Mask out(width, height);
  for (int y = 0; y < sprite_mask.height(); ++y) {
    for (int x = 0; x < sprite_mask.width(); ++x) {
      if (sprite_mask.at(x, y) && out.contains(left + x, top + y)) out.at(left + x, top + y) = 1;
    }
  }
  return out;
}

}  // namespace

void SceneRecipe::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(rss > 0.0) || !finite(rss)) throw DataError("recipe: rss must be > 0");
  if (!(q_d > 0.0) || !finite(q_d)) throw DataError("recipe: q_d must be > 0");
  if (!(scr > 0.0) || !finite(scr)) throw DataError("recipe: scr must be finite and > 0");
  if (!(r_x >= 0.0 && r_x < 1.0)) throw DataError("recipe: r_x must lie in [0, 1)");
  if (!(std::abs(k) <= 1.0)) {
    throw DataError("recipe: |k| = " + fmt(std::abs(k)) + " > 1 has no real target deviation");
  }
  if (!(nu_k > 0.0) || !finite(nu_k)) throw DataError("recipe: nu_k must be > 0");
  if (ring_width < 1) throw DataError("recipe: ring_width must be >= 1");
}

void Sprite::validate() const {
  if (mask.empty() || count_set(mask) == 0) throw DataError("sprite mask is empty");
  if (intensity.width() != mask.width() || intensity.height() != mask.height()) {
    throw DataError("sprite intensity and mask dimensions differ");
  }
  if (!(physical_height > 0.0)) throw DataError("sprite physical_height must be > 0");
}

double QualityMetrics::scr_value() const {
  if (!scr) throw DataError("SCR undefined: background deviation is zero");
  return *scr;
}

double QualityMetrics::k_value() const {
  if (!k) throw DataError("K undefined: RSS is zero");
  return *k;
}

RegionStats region_stats(const Image& image, const Mask& region) {
  require_same_shape(image, region, "region_stats");
  double n = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!region[i]) continue;
    sum += image[i];
    n += 1.0;
  }
  RegionStats s;
  s.surface = n;
  if (n == 0.0) return s;
  s.mean = sum / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!region[i]) continue;
    const double d = image[i] - s.mean;
    ss += d * d;
  }
  s.std_dev = std::sqrt(ss / n);
  return s;
}

Mask local_ring(const Mask& target_mask, int ring_width, const Mask* exclude) {
  std::vector<std::pair<int, int>> disk;
  for (int dy = -ring_width; dy <= ring_width; ++dy) {
    for (int dx = -ring_width; dx <= ring_width; ++dx) {
      if (dx * dx + dy * dy <= ring_width * ring_width) disk.emplace_back(dx, dy);
    }
  }
  Mask ring(target_mask.width(), target_mask.height());
  for (int y = 0; y < target_mask.height(); ++y) {
    for (int x = 0; x < target_mask.width(); ++x) {
      if (!target_mask.at(x, y)) continue;
      for (auto [dx, dy] : disk) {
        if (ring.contains(x + dx, y + dy)) ring.at(x + dx, y + dy) = 1;
      }
    }
  }
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (target_mask[i] || (exclude != nullptr && (*exclude)[i])) ring[i] = 0;
  }
  return ring;
}

RegionSet measure_regions(const Image& image, const Mask& target_mask, int ring_width,
                          const Mask* exclude) {
  require_same_shape(image, target_mask, "measure_regions");
  if (exclude != nullptr) require_same_shape(image, *exclude, "measure_regions");
  if (count_set(target_mask) == 0) throw DataError("measure_regions: target mask is empty");
  if (touches_border(target_mask)) {
    throw DataError("measure_regions: target mask touches the image border");
  }
  if (ring_width < 1) throw DataError("measure_regions: ring width must be >= 1");

  const Mask ring = local_ring(target_mask, ring_width, exclude);
  Mask background(image.width(), image.height());
  Mask remaining(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const bool excluded = exclude != nullptr && (*exclude)[i];
    background[i] = (!target_mask[i] && !excluded) ? 1 : 0;
    remaining[i] = (background[i] && !ring[i]) ? 1 : 0;
  }
  RegionSet r;
  r.target = region_stats(image, target_mask);
  r.local_background = region_stats(image, ring);
  r.remaining_background = region_stats(image, remaining);
  r.background = region_stats(image, background);
  if (r.local_background.surface == 0.0) {
    throw DataError("measure_regions: local background ring is empty");
  }
  return r;
}

QualityMetrics compute_quality(const RegionStats& target, const RegionStats& local_background,
                               const RegionStats& background, double nu_k) {
  if (!(nu_k > 0.0)) throw DataError("compute_quality: nu_k must be > 0");
  const double delta = target.mean - local_background.mean;
  QualityMetrics q;
  q.rss = std::sqrt(delta * delta + target.std_dev * target.std_dev) / nu_k;
  q.q_d = q.rss * target.surface;
  if (background.std_dev > 0.0) q.scr = nu_k * q.rss / background.std_dev;
  if (q.rss > 0.0) q.k = (local_background.mean - target.mean) / (nu_k * q.rss);
  return q;
}

LinearTransform derive_target_transform(const SceneRecipe& recipe,
                                        const RegionStats& local_background,
                                        const RegionStats& raw_target) {
  if (!(std::abs(recipe.k) <= 1.0)) {
    throw DataError("target transform: |K| > 1 admits no real target deviation");
  }
  const double contrast = recipe.nu_k * recipe.rss;
  const double mean = local_background.mean - recipe.k * contrast;
  const double sigma = contrast * std::sqrt(std::max(0.0, 1.0 - recipe.k * recipe.k));
  LinearTransform t;
  if (raw_target.std_dev > 0.0) {
    t.gain = sigma / raw_target.std_dev;
  } else if (sigma > 0.0) {
    throw DataError("flat sprite cannot carry internal contrast");
  }
  t.offset = mean - t.gain * raw_target.mean;
  return t;
}

LinearTransform derive_background_transform(const SceneRecipe& recipe,
                                            const RegionStats& raw_background) {
  if (!(recipe.scr > 0.0) || !std::isfinite(recipe.scr)) {
    throw DataError("background transform: SCR must be finite and > 0");
  }
  if (!(raw_background.std_dev > 0.0)) {
    throw DataError("background transform: background has zero deviation");
  }
  const double sigma = recipe.nu_k * recipe.rss / recipe.scr;
  LinearTransform t;
  t.gain = sigma / raw_background.std_dev;
  t.offset = raw_background.mean * (1.0 - t.gain);
  return t;
}

namespace {

// Bilinear sample with zeros outside the source.
double sample_zero_padded(const Image& src, double fx, double fy) {
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0;
  const double ty = fy - y0;
  auto at = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= src.width() || y >= src.height()) ? 0.0 : src.at(x, y);
  };
  const double top = (1 - tx) * at(x0, y0) + tx * at(x0 + 1, y0);
  const double bottom = (1 - tx) * at(x0, y0 + 1) + tx * at(x0 + 1, y0 + 1);
  return (1 - ty) * top + ty * bottom;
}

struct ScaledWeights {
  Image weight;    // area coverage of each output pixel by the mask
  Image intensity; // coverage-normalised intensity
};

struct Tap {
  int src;
  double weight;
};

// Output pixel i spans source [(i - 1) / factor, i / factor]; one tap per
// overlapped source pixel, weighted by overlap length times factor.
std::vector<std::vector<Tap>> area_taps(int out_size, int src_size, double factor) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out_size));
  for (int i = 0; i < out_size; ++i) {
    const double a = (i - 1) / factor;
    const double b = i / factor;
    for (int s = std::max(0, static_cast<int>(std::floor(a))); s < src_size && s < b; ++s) {
      const double overlap = std::min<double>(b, s + 1) - std::max<double>(a, s);
      if (overlap > 0.0) taps[static_cast<std::size_t>(i)].push_back({s, overlap * factor});
    }
  }
  return taps;
}

ScaledWeights scaled_weights(const Sprite& sprite, double factor) {
  sprite.validate();
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DataError("sprite scale must be > 0");
  const int sw = sprite.intensity.width();
  const int sh = sprite.intensity.height();
  const int w = static_cast<int>(std::ceil(sw * factor)) + 2;
  const int h = static_cast<int>(std::ceil(sh * factor)) + 2;

  const Image weight = to_image(sprite.mask);
  Image weighted = sprite.intensity;
  for (std::size_t i = 0; i < weighted.size(); ++i) weighted[i] *= weight[i];
  const auto tx = area_taps(w, sw, factor);
  const auto ty = area_taps(h, sh, factor);
  ScaledWeights out{Image(w, h), Image(w, h)};
  for (int y = 0; y < h; ++y) {
    const double fy = (y - 0.5) / factor - 0.5;
    for (int x = 0; x < w; ++x) {
      double cover = 0.0, sum = 0.0;
      for (const Tap& v : ty[static_cast<std::size_t>(y)]) {
        for (const Tap& u : tx[static_cast<std::size_t>(x)]) {
          cover += u.weight * v.weight * weight.at(u.src, v.src);
          sum += u.weight * v.weight * weighted.at(u.src, v.src);
        }
      }
      out.weight.at(x, y) = cover;
      if (cover <= 0.0) continue;
      // Bilinear intensity where available keeps upscaled texture smooth.
      const double fx = (x - 0.5) / factor - 0.5;
      const double bc = sample_zero_padded(weight, fx, fy);
      out.intensity.at(x, y) = bc > 1e-9 ? sample_zero_padded(weighted, fx, fy) / bc : sum / cover;
    }
  }
  return out;
}

Sprite finish_scaled(const Sprite& source, const ScaledWeights& sw, Mask mask, double factor) {
  const auto bounds = mask_bounds(mask);
  if (!bounds) throw DataError("sprite vanished after scaling by " + fmt(factor));
  Sprite out = source;
  out.mask = crop(mask, *bounds);
  out.intensity = crop(sw.intensity, *bounds);
  return out;
}

}  // namespace

Sprite scale_sprite(const Sprite& sprite, double factor) {
  const ScaledWeights sw = scaled_weights(sprite, factor);
  return finish_scaled(sprite, sw, threshold(sw.weight, 0.5), factor);
}

Sprite scale_target_for_qd(const Sprite& sprite, const SceneRecipe& recipe) {
  sprite.validate();
  if (!(recipe.rss > 0.0)) throw DataError("Q_D scaling requires rss > 0");
  const double wanted = recipe.q_d / recipe.rss;
  if (wanted < kMinTargetSurface) throw DataError("target below minimum resolvable size");
  const double raw = static_cast<double>(count_set(sprite.mask));
  const double factor = std::sqrt(wanted / raw);
  const ScaledWeights sw = scaled_weights(sprite, factor);

  // Keep the round(wanted) best-covered pixels. Straight edges tie on
  // coverage, so ties go to the pixel nearest the coverage centroid.
  const int w = sw.weight.width();
  double cx = 0.0, cy = 0.0, total = 0.0;
  std::vector<std::size_t> support;
  for (int y = 0; y < sw.weight.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      const double c = sw.weight.at(x, y);
      if (c <= 0.0) continue;
      cx += c * x;
      cy += c * y;
      total += c;
      support.push_back(static_cast<std::size_t>(y) * w + x);
    }
  }
  const auto keep = static_cast<std::size_t>(std::llround(wanted));
  if (support.size() < keep) {
    throw DataError("cannot scale target to surface " + fmt(wanted) + " within 2%");
  }
  cx /= total;
  cy /= total;
  auto dist2 = [&](std::size_t i) {
    const double dx = static_cast<double>(i % w) - cx;
    const double dy = static_cast<double>(i / w) - cy;
    return dx * dx + dy * dy;
  };
  std::stable_sort(support.begin(), support.end(), [&](std::size_t a, std::size_t b) {
    const double ca = sw.weight[a], cb = sw.weight[b];
    if (std::abs(ca - cb) > 1e-9) return ca > cb;
    return dist2(a) < dist2(b);
  });
  Mask mask(w, sw.weight.height());
  for (std::size_t i = 0; i < keep; ++i) mask[support[i]] = 1;
  Sprite out = finish_scaled(sprite, sw, std::move(mask), factor);
  if (std::abs(static_cast<double>(count_set(out.mask)) - wanted) > kSurfaceTolerance * wanted) {
    throw DataError("cannot scale target to surface " + fmt(wanted) + " within 2%");
  }
  return out;
}

OccultantPlacement place_occultant(const Mask& target_mask, const Sprite& occultant, double r_x,
                                   Rng& rng, std::optional<double> axis_degrees) {
  occultant.validate();
  if (!(r_x >= 0.0 && r_x < 1.0)) throw DataError("occultation ratio must lie in [0, 1)");
  const auto target_bounds = mask_bounds(target_mask);
  if (!target_bounds) throw DataError("place_occultant: target mask is empty");
  const double surface = static_cast<double>(count_set(target_mask));
  const double occ_surface = static_cast<double>(count_set(occultant.mask));
  if (occ_surface < (r_x - kOcclusionTolerance) * surface) {
    throw DataError("occultation ratio " + fmt(r_x) + " unreachable: occultant covers at most " +
                    fmt(occ_surface / surface) + " of the target");
  }

  const Centroid c = centroid(target_mask);
  const int ow = occultant.mask.width();
  const int oh = occultant.mask.height();
  const double reach = std::hypot(target_bounds->width(), target_bounds->height()) +
                       std::hypot(ow, oh) + 2.0;

  std::vector<double> axes;
  if (axis_degrees) {
    axes.push_back(*axis_degrees);
  } else {
    std::uniform_real_distribution<double> angle(0.0, 360.0);
    for (int i = 0; i < 48; ++i) axes.push_back(angle(rng));
  }

  OccultantPlacement best;
  double best_err = std::numeric_limits<double>::infinity();
  for (double axis : axes) {
    const double rad = axis * std::numbers::pi / 180.0;
    const double ux = std::cos(rad);
    const double uy = std::sin(rad);
    int last_left = std::numeric_limits<int>::min();
    int last_top = std::numeric_limits<int>::min();
    for (double d = 0.0; d <= reach; d += 0.25) {
      const int left = static_cast<int>(std::lround(c.x + d * ux - 0.5 * ow));
      const int top = static_cast<int>(std::lround(c.y + d * uy - 0.5 * oh));
      if (left == last_left && top == last_top) continue;
      last_left = left;
      last_top = top;
      const double achieved =
          static_cast<double>(covered(target_mask, occultant.mask, left, top)) / surface;
      const double err = std::abs(achieved - r_x);
      if (r_x == 0.0 && achieved > 0.0) continue;
      if (err < best_err) {
        best_err = err;
        best.left = left;
        best.top = top;
        best.axis_degrees = axis;
        best.achieved = achieved;
      }
      if (r_x == 0.0 || achieved < r_x - kOcclusionTolerance) break;
    }
    if (best_err <= kOcclusionTolerance) break;
  }
  if (best_err > kOcclusionTolerance) {
    throw DataError("occultation ratio " + fmt(r_x) + " unreachable with the given occultant");
  }
  best.footprint = stamp(occultant.mask, best.left, best.top, target_mask.width(),
                         target_mask.height());
  return best;
}

ComposedScene compose_scene(const SceneRecipe& recipe, const Image& background,
                            const Sprite& target, const Sprite* occultant,
                            const ComposeOptions& options) {
  recipe.validate();
  target.validate();
  if (background.empty()) throw DataError("background image is empty");
  if (recipe.r_x > 0.0 && occultant == nullptr) {
    throw DataError("recipe requests occultation but names no occultant");
  }
  Rng rng = make_rng(recipe.seed, 0x0cc);
  const int width = background.width();
  const int height = background.height();

  // Step B geometry: target footprint at the requested position.
  const Sprite scaled = options.target_scale ? scale_sprite(target, *options.target_scale)
                                             : scale_target_for_qd(target, recipe);
  const int tw = scaled.mask.width();
  const int th = scaled.mask.height();
  const int left = static_cast<int>(std::lround(recipe.target_x - 0.5 * tw));
  const int top = static_cast<int>(std::lround(recipe.target_y - 0.5 * th));
  if (left < 1 || top < 1 || left + tw > width - 1 || top + th > height - 1) {
    throw DataError("target footprint at (" + fmt(recipe.target_x) + ", " + fmt(recipe.target_y) +
                    ") does not fit inside the frame");
  }

  ComposedScene scene;
  scene.target_mask = stamp(scaled.mask, left, top, width, height);
  scene.full_surface = static_cast<double>(count_set(scene.target_mask));

  // Step A: occultant.
  scene.occultant_mask = Mask(width, height);
  double achieved = 0.0;
  int occ_left = 0;
  int occ_top = 0;
  if (occultant != nullptr) {
    const auto placement = place_occultant(scene.target_mask, *occultant, recipe.r_x, rng,
                                           options.occultant_axis_degrees);
    scene.occultant_mask = placement.footprint;
    achieved = placement.achieved;
    occ_left = placement.left;
    occ_top = placement.top;
  }
  scene.visible_mask = scene.target_mask;
  for (std::size_t i = 0; i < scene.visible_mask.size(); ++i) {
    if (scene.occultant_mask[i]) scene.visible_mask[i] = 0;
  }
  scene.visible_surface = static_cast<double>(count_set(scene.visible_mask));
  if (scene.visible_surface == 0.0) throw DataError("target fully occluded");

  // Step C: background gain/offset from the raw global background.
  const RegionSet raw = measure_regions(background, scene.visible_mask, recipe.ring_width,
                                        &scene.occultant_mask);
  scene.background_transform = derive_background_transform(recipe, raw.background);
  Image composite = background;
  for (double& v : composite.pixels()) v = scene.background_transform(v);
  const RegionStats ring =
      region_stats(composite, local_ring(scene.visible_mask, recipe.ring_width,
                                         &scene.occultant_mask));

  // Step C: target gain/offset solved on the visible pixels.
  Image sprite_layer(width, height);
  for (int y = 0; y < th; ++y) {
    for (int x = 0; x < tw; ++x) {
      if (scaled.mask.at(x, y)) sprite_layer.at(left + x, top + y) = scaled.intensity.at(x, y);
    }
  }
  const RegionStats raw_target = region_stats(sprite_layer, scene.visible_mask);
  scene.target_transform = derive_target_transform(recipe, ring, raw_target);

  for (std::size_t i = 0; i < composite.size(); ++i) {
    if (scene.visible_mask[i]) composite[i] = scene.target_transform(sprite_layer[i]);
  }
  if (occultant != nullptr) {
    for (int y = 0; y < occultant->mask.height(); ++y) {
      for (int x = 0; x < occultant->mask.width(); ++x) {
        const int ix = occ_left + x;
        const int iy = occ_top + y;
        if (occultant->mask.at(x, y) && composite.contains(ix, iy)) {
          composite.at(ix, iy) = occultant->intensity.at(x, y);
        }
      }
    }
  }

  std::size_t clamped = 0;
  for (double& v : composite.pixels()) {
    if (v < 0.0 || v > kGrayMax) {
      ++clamped;
      v = std::clamp(v, 0.0, kGrayMax);
    }
  }
  scene.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(composite.size());
  if (scene.clamped_fraction > options.max_clamped_fraction) {
    throw DataError("recipe out of gamut: " + fmt(100.0 * scene.clamped_fraction) +
                    "% of pixels clamped");
  }

  scene.image = std::move(composite);
  scene.regions = measure_regions(scene.image, scene.visible_mask, recipe.ring_width,
                                  &scene.occultant_mask);
  scene.measured = compute_quality(scene.regions.target, scene.regions.local_background,
                                   scene.regions.background, recipe.nu_k);
  scene.q_d_full = scene.measured.rss * scene.full_surface;

  const auto tb = mask_bounds(scene.target_mask);
  scene.truth.object_id = options.object_id;
  scene.truth.bbox = BoundingBox::from_edges(tb->x0, tb->y0, tb->x1, tb->y1);
  scene.truth.recognition_class = target.recognition_class;
  scene.truth.identification_class = target.identification_class;
  scene.truth.occlusion_fraction = achieved;
  return scene;
}

}  // namespace atdr
