#ifndef ATDR_ATDR_H
#define ATDR_ATDR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ATDR_BUILDING_LIBRARY)
#    define ATDR_API __declspec(dllexport)
#  else
#    define ATDR_API __declspec(dllimport)
#  endif
#else
#  define ATDR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes for the command-line tool. */
typedef enum atdr_status {
  ATDR_OK = 0,
  ATDR_USAGE_ERROR = 1,
  ATDR_DATA_ERROR = 2,
  ATDR_PARTIAL_FAILURE = 3,
  ATDR_INTERNAL_ERROR = 4
} atdr_status;

ATDR_API const char* atdr_version(void);

/* Message of the last failing call on this thread; "" after success. */
ATDR_API const char* atdr_last_error(void);

typedef struct atdr_box {
  double x_center;
  double y_center;
  double width;
  double height;
} atdr_box;

typedef enum atdr_match_mode { ATDR_MATCH_JACCARD = 0, ATDR_MATCH_ROBIN = 1 } atdr_match_mode;

typedef struct atdr_criterion {
  atdr_match_mode mode;
  double epsilon0;
  double epsilon1;
  double epsilon2;
  double epsilon3;
} atdr_criterion;

ATDR_API atdr_criterion atdr_criterion_default(atdr_match_mode mode);

ATDR_API atdr_status atdr_jaccard(const atdr_box* z, const atdr_box* z_ref, double* out);
ATDR_API atdr_status atdr_m1_localization(const atdr_box* z, const atdr_box* z_ref, double* out);
ATDR_API atdr_status atdr_m2_scale(const atdr_box* z, const atdr_box* z_ref, double* out);
ATDR_API atdr_status atdr_m3_aspect(const atdr_box* z, const atdr_box* z_ref, double* out);
ATDR_API atdr_status atdr_is_good_detection(const atdr_box* z, const atdr_box* z_ref,
                                            const atdr_criterion* c, int* out);

/* Datasets: JSON Lines ground truth and detections. */
typedef struct atdr_dataset atdr_dataset;

/* taxonomy_path may be NULL. */
ATDR_API atdr_status atdr_dataset_load(const char* path, const char* taxonomy_path,
                                       atdr_dataset** out);
ATDR_API void atdr_dataset_free(atdr_dataset* dataset);
ATDR_API size_t atdr_dataset_frame_count(const atdr_dataset* dataset);
ATDR_API size_t atdr_dataset_truth_count(const atdr_dataset* dataset);
ATDR_API size_t atdr_dataset_detection_count(const atdr_dataset* dataset);
ATDR_API atdr_status atdr_dataset_save(const atdr_dataset* dataset, const char* path);

typedef struct atdr_detection_totals {
  size_t true_positives;
  size_t false_alarms;
  size_t missed;
  size_t mt_count;
  size_t mo_count;
  size_t truths;
  size_t frames;
  double detection_rate;
  double false_alarm_rate;
} atdr_detection_totals;

ATDR_API atdr_status atdr_score_detections(const atdr_dataset* dataset, const atdr_criterion* c,
                                           double min_confidence, atdr_detection_totals* out);

typedef struct atdr_roc atdr_roc;

ATDR_API atdr_status atdr_roc_compute(const atdr_dataset* dataset, const atdr_criterion* c,
                                      atdr_roc** out);
ATDR_API void atdr_roc_free(atdr_roc* roc);
ATDR_API size_t atdr_roc_size(const atdr_roc* roc);
ATDR_API atdr_status atdr_roc_point(const atdr_roc* roc, size_t index, double* threshold,
                                    double* far, double* dr);

ATDR_API atdr_status atdr_track_score(const atdr_dataset* dataset, const atdr_criterion* c,
                                      size_t* fit, size_t* fio);

/* Jobs. Path fields may be NULL where marked optional. */
typedef struct atdr_gen_scenes_options {
  const char* recipes_path;
  const char* assets_path;
  const char* out_dir;
  uint64_t seed;
  unsigned jobs;
  const char* image_extension; /* optional, ".pgm" or ".png" */
} atdr_gen_scenes_options;

/* ATDR_PARTIAL_FAILURE when some recipes failed; see manifest.json. */
ATDR_API atdr_status atdr_gen_scenes(const atdr_gen_scenes_options* options, size_t* produced,
                                     size_t* failed);

typedef struct atdr_gen_sequence_options {
  const char* job_path;
  const char* assets_path; /* optional */
  const char* out_dir;
  int has_seed;
  uint64_t seed;
  unsigned jobs;
} atdr_gen_sequence_options;

ATDR_API atdr_status atdr_gen_sequence(const atdr_gen_sequence_options* options, size_t* frames);

typedef struct atdr_mock_options {
  const char* truth_path;
  const char* out_path;
  const char* taxonomy_path; /* optional */
  double jitter_sigma;
  double miss_rate;
  double clutter_rate;
  double classify_accuracy;
  double track_switch_rate;
  uint64_t seed;
  int image_width;
  int image_height;
  int quality_aware;
  double scr_half;
} atdr_mock_options;

ATDR_API atdr_mock_options atdr_mock_options_default(void);
ATDR_API atdr_status atdr_mock_detect(const atdr_mock_options* options, size_t* frames);

enum { ATDR_TASK_DETECT = 1, ATDR_TASK_CLASSIFY = 2, ATDR_TASK_TRACK = 4 };

typedef struct atdr_eval_options {
  const char* dataset_path;
  const char* taxonomy_path;       /* optional */
  const char* out_dir;
  const char* group_manifest_path; /* optional */
  atdr_criterion criterion;
  unsigned tasks;
  uint64_t seed;
  double min_confidence;
} atdr_eval_options;

ATDR_API atdr_eval_options atdr_eval_options_default(void);
ATDR_API atdr_status atdr_eval(const atdr_eval_options* options);

typedef struct atdr_report_options {
  const char* const* labels;
  const char* const* roc_paths;
  size_t count;
  const char* out_dir;
  const char* title; /* optional */
  uint64_t seed;
} atdr_report_options;

ATDR_API atdr_status atdr_report(const atdr_report_options* options);

ATDR_API atdr_status atdr_make_demo_assets(const char* out_dir, uint64_t seed, int background_size);

#ifdef __cplusplus
}
#endif

#endif
