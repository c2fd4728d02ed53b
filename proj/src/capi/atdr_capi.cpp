#include "atdr/atdr.h"

#include <cmath>
#include <exception>
#include <limits>
#include <filesystem>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "atdr/annotations.hpp"
#include "atdr/assets.hpp"
#include "atdr/demo_assets.hpp"
#include "atdr/detect_eval.hpp"
#include "atdr/error.hpp"
#include "atdr/jobs.hpp"
#include "atdr/track_eval.hpp"

struct atdr_dataset {
  std::vector<atdr::FrameRecord> frames;
};

struct atdr_roc {
  atdr::RocCurve curve;
};

namespace {

thread_local std::string g_last_error;

atdr_status fail(atdr_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, mapping exceptions onto status codes.
template <typename Fn>
atdr_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const atdr::UsageError& e) {
    return fail(ATDR_USAGE_ERROR, e.what());
  } catch (const atdr::DataError& e) {
    return fail(ATDR_DATA_ERROR, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ATDR_DATA_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ATDR_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(ATDR_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(ATDR_INTERNAL_ERROR, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw atdr::UsageError(std::string(what) + " is NULL");
}

atdr::BoundingBox to_box(const atdr_box* b) {
  require(b, "box");
  return atdr::BoundingBox(b->x_center, b->y_center, b->width, b->height);
}

atdr::MatchCriterion to_criterion(const atdr_criterion* c) {
  if (c == nullptr) return {};
  if (c->mode != ATDR_MATCH_JACCARD && c->mode != ATDR_MATCH_ROBIN) {
    throw atdr::UsageError("unknown match mode");
  }
  atdr::MatchCriterion m;
  m.mode = c->mode == ATDR_MATCH_ROBIN ? atdr::MatchMode::robin : atdr::MatchMode::jaccard;
  m.epsilon0 = c->epsilon0;
  m.epsilon1 = c->epsilon1;
  m.epsilon2 = c->epsilon2;
  m.epsilon3 = c->epsilon3;
  m.validate();
  return m;
}

std::optional<std::filesystem::path> opt_path(const char* p) {
  if (p == nullptr || *p == '\0') return std::nullopt;
  return std::filesystem::path(p);
}

template <typename Metric>
atdr_status metric(const atdr_box* z, const atdr_box* z_ref, double* out, Metric m) {
  return guarded([&] {
    require(out, "out");
    *out = m(to_box(z), to_box(z_ref));
    return ATDR_OK;
  });
}

}  // namespace

extern "C" {

const char* atdr_version(void) { return atdr::version(); }

const char* atdr_last_error(void) { return g_last_error.c_str(); }

atdr_criterion atdr_criterion_default(atdr_match_mode mode) {
  const atdr::MatchCriterion d;
  return {mode, d.epsilon0, d.epsilon1, d.epsilon2, d.epsilon3};
}

atdr_status atdr_jaccard(const atdr_box* z, const atdr_box* z_ref, double* out) {
  return metric(z, z_ref, out, atdr::jaccard);
}

atdr_status atdr_m1_localization(const atdr_box* z, const atdr_box* z_ref, double* out) {
  return metric(z, z_ref, out, atdr::m1_localization);
}

atdr_status atdr_m2_scale(const atdr_box* z, const atdr_box* z_ref, double* out) {
  return metric(z, z_ref, out, atdr::m2_scale);
}

atdr_status atdr_m3_aspect(const atdr_box* z, const atdr_box* z_ref, double* out) {
  return metric(z, z_ref, out, atdr::m3_aspect);
}

atdr_status atdr_is_good_detection(const atdr_box* z, const atdr_box* z_ref,
                                   const atdr_criterion* c, int* out) {
  return guarded([&] {
    require(out, "out");
    *out = atdr::is_good_detection(to_box(z), to_box(z_ref), to_criterion(c)) ? 1 : 0;
    return ATDR_OK;
  });
}

atdr_status atdr_dataset_load(const char* path, const char* taxonomy_path, atdr_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    std::optional<atdr::ClassTaxonomy> taxonomy;
    if (auto t = opt_path(taxonomy_path)) taxonomy = atdr::ClassTaxonomy::load(*t);
    auto ds = std::make_unique<atdr_dataset>();
    ds->frames = atdr::load_dataset(path, taxonomy ? &*taxonomy : nullptr);
    *out = ds.release();
    return ATDR_OK;
  });
}

void atdr_dataset_free(atdr_dataset* dataset) { delete dataset; }

size_t atdr_dataset_frame_count(const atdr_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->frames.size();
}

size_t atdr_dataset_truth_count(const atdr_dataset* dataset) {
  size_t n = 0;
  if (dataset != nullptr) {
    for (const auto& f : dataset->frames) n += f.truths.size();
  }
  return n;
}

size_t atdr_dataset_detection_count(const atdr_dataset* dataset) {
  size_t n = 0;
  if (dataset != nullptr) {
    for (const auto& f : dataset->frames) n += f.detections.size();
  }
  return n;
}

atdr_status atdr_dataset_save(const atdr_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    atdr::save_dataset(path, dataset->frames);
    return ATDR_OK;
  });
}

atdr_status atdr_score_detections(const atdr_dataset* dataset, const atdr_criterion* c,
                                  double min_confidence, atdr_detection_totals* out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    const auto r = atdr::score_detections(dataset->frames, to_criterion(c), min_confidence);
    out->true_positives = r.totals.true_positives;
    out->false_alarms = r.totals.false_alarms;
    out->missed = r.totals.missed;
    out->mt_count = r.totals.mt_count;
    out->mo_count = r.totals.mo_count;
    out->truths = r.truth_count;
    out->frames = r.frame_count;
    out->detection_rate = r.detection_rate();
    out->false_alarm_rate = r.false_alarm_rate();
    return ATDR_OK;
  });
}

atdr_status atdr_roc_compute(const atdr_dataset* dataset, const atdr_criterion* c, atdr_roc** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = nullptr;
    auto roc = std::make_unique<atdr_roc>();
    roc->curve = atdr::roc_curve(dataset->frames, to_criterion(c));
    *out = roc.release();
    return ATDR_OK;
  });
}

void atdr_roc_free(atdr_roc* roc) { delete roc; }

size_t atdr_roc_size(const atdr_roc* roc) { return roc == nullptr ? 0 : roc->curve.points.size(); }

atdr_status atdr_roc_point(const atdr_roc* roc, size_t index, double* threshold, double* far,
                           double* dr) {
  return guarded([&] {
    require(roc, "roc");
    if (index >= roc->curve.points.size()) throw atdr::UsageError("ROC point index out of range");
    const auto& p = roc->curve.points[index];
    if (threshold != nullptr) *threshold = p.threshold;
    if (far != nullptr) *far = p.far;
    if (dr != nullptr) *dr = p.dr;
    return ATDR_OK;
  });
}

atdr_status atdr_track_score(const atdr_dataset* dataset, const atdr_criterion* c, size_t* fit,
                             size_t* fio) {
  return guarded([&] {
    require(dataset, "dataset");
    const auto s = atdr::score_tracks(dataset->frames, to_criterion(c));
    if (fit != nullptr) *fit = s.fit_count;
    if (fio != nullptr) *fio = s.fio_count;
    return ATDR_OK;
  });
}

atdr_status atdr_gen_scenes(const atdr_gen_scenes_options* options, size_t* produced,
                            size_t* failed) {
  return guarded([&] {
    require(options, "options");
    require(options->recipes_path, "recipes_path");
    require(options->assets_path, "assets_path");
    require(options->out_dir, "out_dir");
    atdr::GenScenesOptions o;
    o.recipes = options->recipes_path;
    o.assets = atdr::resolve_asset_path(options->assets_path);
    o.out_dir = options->out_dir;
    o.seed = options->seed;
    o.jobs = options->jobs;
    if (options->image_extension != nullptr && *options->image_extension != '\0') {
      o.image_extension = options->image_extension;
      if (o.image_extension != ".pgm" && o.image_extension != ".png") {
        throw atdr::UsageError("image extension must be .pgm or .png");
      }
    }
    const auto r = atdr::gen_scenes(o);
    if (produced != nullptr) *produced = r.produced;
    if (failed != nullptr) *failed = r.failures.size();
    if (r.failures.empty()) return ATDR_OK;
    std::string msg = std::to_string(r.failures.size()) + " recipe(s) failed";
    for (const auto& f : r.failures) msg += "\n  recipe " + std::to_string(f.index) + ": " + f.message;
    return fail(ATDR_PARTIAL_FAILURE, msg);
  });
}

atdr_status atdr_gen_sequence(const atdr_gen_sequence_options* options, size_t* frames) {
  return guarded([&] {
    require(options, "options");
    require(options->job_path, "job_path");
    require(options->out_dir, "out_dir");
    atdr::GenSequenceOptions o;
    o.job = options->job_path;
    if (auto a = opt_path(options->assets_path)) o.assets = atdr::resolve_asset_path(*a);
    o.out_dir = options->out_dir;
    if (options->has_seed) o.seed = options->seed;
    o.jobs = options->jobs;
    const auto n = atdr::gen_sequence(o);
    if (frames != nullptr) *frames = n;
    return ATDR_OK;
  });
}

atdr_mock_options atdr_mock_options_default(void) {
  const atdr::MockConfig d;
  atdr_mock_options o{};
  o.jitter_sigma = d.jitter_sigma;
  o.miss_rate = d.miss_rate;
  o.clutter_rate = d.clutter_rate;
  o.classify_accuracy = d.classify_accuracy;
  o.track_switch_rate = d.track_switch_rate;
  o.seed = d.seed;
  o.image_width = d.image_width;
  o.image_height = d.image_height;
  o.quality_aware = d.quality_aware ? 1 : 0;
  o.scr_half = d.scr_half;
  return o;
}

atdr_status atdr_mock_detect(const atdr_mock_options* options, size_t* frames) {
  return guarded([&] {
    require(options, "options");
    require(options->truth_path, "truth_path");
    require(options->out_path, "out_path");
    atdr::MockOptions o;
    o.truth = options->truth_path;
    o.out = options->out_path;
    o.taxonomy = opt_path(options->taxonomy_path);
    o.config.jitter_sigma = options->jitter_sigma;
    o.config.miss_rate = options->miss_rate;
    o.config.clutter_rate = options->clutter_rate;
    o.config.classify_accuracy = options->classify_accuracy;
    o.config.track_switch_rate = options->track_switch_rate;
    o.config.seed = options->seed;
    o.config.image_width = options->image_width;
    o.config.image_height = options->image_height;
    o.config.quality_aware = options->quality_aware != 0;
    o.config.scr_half = options->scr_half;
    const auto n = atdr::run_mock(o);
    if (frames != nullptr) *frames = n;
    return ATDR_OK;
  });
}

atdr_eval_options atdr_eval_options_default(void) {
  atdr_eval_options o{};
  o.criterion = atdr_criterion_default(ATDR_MATCH_JACCARD);
  o.tasks = ATDR_TASK_DETECT;
  o.min_confidence = -std::numeric_limits<double>::infinity();
  return o;
}

atdr_status atdr_eval(const atdr_eval_options* options) {
  return guarded([&] {
    require(options, "options");
    require(options->dataset_path, "dataset_path");
    require(options->out_dir, "out_dir");
    atdr::EvalOptions o;
    o.dataset = options->dataset_path;
    o.taxonomy = opt_path(options->taxonomy_path);
    o.out_dir = options->out_dir;
    o.group_manifest = opt_path(options->group_manifest_path);
    o.criterion = to_criterion(&options->criterion);
    o.tasks = options->tasks;
    o.seed = options->seed;
    o.min_confidence = options->min_confidence;
    atdr::run_eval(o);
    return ATDR_OK;
  });
}

atdr_status atdr_report(const atdr_report_options* options) {
  return guarded([&] {
    require(options, "options");
    require(options->out_dir, "out_dir");
    if (options->count > 0) {
      require(options->labels, "labels");
      require(options->roc_paths, "roc_paths");
    }
    atdr::ReportOptions o;
    for (size_t i = 0; i < options->count; ++i) {
      require(options->labels[i], "label");
      require(options->roc_paths[i], "roc path");
      o.curves.emplace_back(options->labels[i], options->roc_paths[i]);
    }
    o.out_dir = options->out_dir;
    if (options->title != nullptr) o.title = options->title;
    o.seed = options->seed;
    atdr::run_report(o);
    return ATDR_OK;
  });
}

atdr_status atdr_make_demo_assets(const char* out_dir, uint64_t seed, int background_size) {
  return guarded([&] {
    require(out_dir, "out_dir");
    atdr::make_demo_assets(out_dir, seed, background_size);
    return ATDR_OK;
  });
}

}  // extern "C"
