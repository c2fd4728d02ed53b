#include "atdr/mock_detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "atdr/error.hpp"
#include "atdr/rng.hpp"

namespace atdr {

namespace {

enum Stream : std::uint64_t { kTruthStream = 1, kClutterStream = 2, kTrackStream = 3 };

struct Moments {
  double n = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double v) {
    n += 1.0;
    sum += v;
    sum_sq += v * v;
  }
  double mean() const { return n > 0.0 ? sum / n : 0.0; }
  double stddev() const {
    if (n <= 0.0) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sum_sq / n - m * m));
  }
};

}  // namespace

void MockConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError(std::string(name) + " must lie in [0, 1]");
  };
  unit(miss_rate, "miss_rate");
  unit(clutter_rate, "clutter_rate");
  unit(classify_accuracy, "classify_accuracy");
  unit(track_switch_rate, "track_switch_rate");
  if (!(jitter_sigma >= 0.0) || !std::isfinite(jitter_sigma)) {
    throw UsageError("jitter_sigma must be >= 0");
  }
  if (image_width < 1 || image_height < 1) throw UsageError("image size must be positive");
  if (!(scr_half > 0.0)) throw UsageError("scr_half must be > 0");
}

double estimate_scr(const Image& image, const BoundingBox& box, int ring) {
  const int x0 = std::clamp(static_cast<int>(std::floor(box.left())), 0, image.width());
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.right())), 0, image.width());
  const int y0 = std::clamp(static_cast<int>(std::floor(box.top())), 0, image.height());
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.bottom())), 0, image.height());
  Moments inside, near, rest;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double v = image.at(x, y);
      if (x >= x0 && x < x1 && y >= y0 && y < y1) {
        inside.add(v);
      } else if (x >= x0 - ring && x < x1 + ring && y >= y0 - ring && y < y1 + ring) {
        near.add(v);
      } else {
        rest.add(v);
      }
    }
  }
  if (inside.n == 0.0 || near.n == 0.0) return 0.0;
  const double d = inside.mean() - near.mean();
  const double contrast = std::sqrt(d * d + inside.stddev() * inside.stddev());
  const double clutter = rest.n > 1.0 ? rest.stddev() : near.stddev();
  if (clutter <= 0.0) return std::numeric_limits<double>::infinity();
  return contrast / clutter;
}

std::vector<FrameRecord> mock_detect(const std::vector<FrameRecord>& frames, const MockConfig& cfg,
                                     const ClassTaxonomy* taxonomy,
                                     const std::filesystem::path& image_root) {
  cfg.validate();

  std::vector<std::string> label_pool;
  if (taxonomy != nullptr) {
    label_pool = taxonomy->identification_classes();
  } else {
    std::set<std::string> seen;
    for (const auto& f : frames) {
      for (const auto& t : f.truths) {
        const auto& l = t.identification_class.empty() ? t.recognition_class : t.identification_class;
        if (!l.empty()) seen.insert(l);
      }
    }
    label_pool.assign(seen.begin(), seen.end());
  }

  std::map<std::int64_t, std::int64_t> tracker_of;
  std::int64_t next_tracker = 1;

  std::vector<FrameRecord> out;
  out.reserve(frames.size());
  for (const auto& frame : frames) {
    FrameRecord rec;
    rec.frame_index = frame.frame_index;
    rec.image_path = frame.image_path;
    rec.truths = frame.truths;

    const std::uint64_t frame_seed =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(frame.frame_index));
    Rng truth_rng = make_rng(frame_seed, kTruthStream);
    Rng clutter_rng = make_rng(frame_seed, kClutterStream);
    Rng track_rng = make_rng(frame_seed, kTrackStream);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::optional<Image> image;
    if (!frame.image_path.empty()) {
      std::filesystem::path p(frame.image_path);
      if (p.is_relative()) p = image_root / p;
      std::error_code ec;
      if (std::filesystem::exists(p, ec)) image = read_image(p);
    }
    if (cfg.quality_aware && !image) {
      throw DataError("quality-aware mock needs the image of frame " +
                      std::to_string(frame.frame_index));
    }
    const int width = image ? image->width() : cfg.image_width;
    const int height = image ? image->height() : cfg.image_height;

    for (const auto& truth : frame.truths) {
      // Every draw happens regardless of the outcome so the streams of
      // different settings stay aligned.
      const double u_miss = unit(truth_rng);
      const double zx = normal(truth_rng);
      const double zy = normal(truth_rng);
      const double zw = normal(truth_rng);
      const double zh = normal(truth_rng);
      const double u_label = unit(truth_rng);
      const double u_pick = unit(truth_rng);
      const double u_switch = unit(track_rng);

      bool seen_before = tracker_of.count(truth.object_id) != 0;
      if (!seen_before) {
        tracker_of[truth.object_id] = next_tracker++;
      } else if (u_switch < cfg.track_switch_rate) {
        tracker_of[truth.object_id] = next_tracker++;
      }
      if (u_miss < cfg.miss_rate) continue;

      double quality = 1.0;
      if (cfg.quality_aware) {
        const double scr = estimate_scr(*image, truth.bbox);
        const double visibility = std::isinf(scr) ? 1.0 : scr / (scr + cfg.scr_half);
        quality = std::clamp((1.0 - truth.occlusion_fraction) * visibility, 0.0, 1.0);
      }
      const double sigma = cfg.jitter_sigma * (2.0 - quality);
      const double jx = sigma * zx;
      const double jy = sigma * zy;
      const double jw = sigma * zw;
      const double jh = sigma * zh;

      Detection d;
      const auto& b = truth.bbox;
      d.bbox = BoundingBox(b.x_center() + jx * b.width(), b.y_center() + jy * b.height(),
                           b.width() * std::exp(jw), b.height() * std::exp(jh));
      d.confidence =
          std::clamp(quality * std::exp(-std::sqrt(jx * jx + jy * jy + jw * jw + jh * jh)), 0.0, 1.0);

      const std::string& true_label =
          truth.identification_class.empty() ? truth.recognition_class : truth.identification_class;
      if (!true_label.empty()) {
        d.claimed_class = true_label;
        if (u_label >= cfg.classify_accuracy) {
          std::vector<std::string> others;
          for (const auto& l : label_pool) {
            if (l != true_label) others.push_back(l);
          }
          if (!others.empty()) {
            const auto i = std::min(others.size() - 1,
                                    static_cast<std::size_t>(u_pick * static_cast<double>(others.size())));
            d.claimed_class = others[i];
          }
        }
      }
      d.tracker_id = tracker_of[truth.object_id];
      rec.detections.push_back(std::move(d));
    }

    // Unit-rate Poisson arrivals on [0, clutter_rate]: a larger rate keeps
    // every box of a smaller one and adds more.
    double arrival = 0.0;
    std::exponential_distribution<double> gap(1.0);
    for (;;) {
      arrival += gap(clutter_rng);
      const double ux = unit(clutter_rng);
      const double uy = unit(clutter_rng);
      const double zs = normal(clutter_rng);
      const double za = normal(clutter_rng);
      const double conf = unit(clutter_rng);
      if (arrival > cfg.clutter_rate) break;
      double w = 0.05 * width;
      double h = 0.05 * height;
      if (!frame.truths.empty()) {
        w = frame.truths.front().bbox.width();
        h = frame.truths.front().bbox.height();
      }
      w *= std::exp(0.3 * zs);
      h *= std::exp(0.3 * za);
      Detection d;
      d.bbox = BoundingBox(ux * width, uy * height, w, h);
      d.confidence = conf;
      rec.detections.push_back(std::move(d));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace atdr
