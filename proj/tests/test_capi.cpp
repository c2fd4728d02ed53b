#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "atdr/atdr.h"
#include "test_util.hpp"

namespace {

const char* kFrames =
    R"({"frame": 0, "truths": [{"id": 1, "bbox": [20, 20, 10, 10], "rec_class": "tank", "id_class": "AMX30", "occ": 0}], "detections": [{"bbox": [20, 20, 10, 10], "conf": 0.9, "class": "AMX30", "track": 1}, {"bbox": [80, 80, 5, 5], "conf": 0.4, "class": null, "track": null}]})"
    "\n"
    R"({"frame": 1, "truths": [{"id": 1, "bbox": [22, 20, 10, 10], "rec_class": "tank", "id_class": "AMX30", "occ": 0}], "detections": [{"bbox": [22, 20, 10, 10], "conf": 0.8, "class": "T72", "track": 2}]})"
    "\n";

}  // namespace

TEST(CApi, VersionAndMetrics) {
  EXPECT_STREQ(atdr_version(), "0.3.0");
  const atdr_box a{0, 0, 10, 10}, b{5, 0, 10, 10};
  double v = 0;
  ASSERT_EQ(atdr_jaccard(&a, &b, &v), ATDR_OK);
  EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  ASSERT_EQ(atdr_m1_localization(&b, &a, &v), ATDR_OK);
  EXPECT_DOUBLE_EQ(v, 2.0 / M_PI * std::atan(0.5));
  ASSERT_EQ(atdr_m2_scale(&a, &b, &v), ATDR_OK);
  EXPECT_EQ(v, 0.0);
  ASSERT_EQ(atdr_m3_aspect(&a, &b, &v), ATDR_OK);
  EXPECT_EQ(v, 0.0);
  int good = -1;
  const atdr_criterion c = atdr_criterion_default(ATDR_MATCH_JACCARD);
  EXPECT_EQ(c.epsilon0, 0.5);
  ASSERT_EQ(atdr_is_good_detection(&a, &b, &c, &good), ATDR_OK);
  EXPECT_EQ(good, 0);
  const atdr_criterion robin = atdr_criterion_default(ATDR_MATCH_ROBIN);
  EXPECT_EQ(robin.epsilon1, 0.15);
  EXPECT_EQ(robin.epsilon2, 0.5);
  EXPECT_EQ(robin.epsilon3, 0.15);
}

TEST(CApi, InvalidArgumentsReportErrors) {
  const atdr_box bad{0, 0, -1, 10}, ok{0, 0, 1, 1};
  double v = 0;
  EXPECT_EQ(atdr_jaccard(&bad, &ok, &v), ATDR_DATA_ERROR);
  EXPECT_NE(std::string(atdr_last_error()).find("width"), std::string::npos);
  EXPECT_EQ(atdr_jaccard(nullptr, &ok, &v), ATDR_USAGE_ERROR);
  EXPECT_EQ(atdr_jaccard(&ok, &ok, &v), ATDR_OK);
  EXPECT_STREQ(atdr_last_error(), "");
  atdr_dataset* ds = nullptr;
  EXPECT_EQ(atdr_dataset_load("/nonexistent/x.jsonl", nullptr, &ds), ATDR_DATA_ERROR);
  EXPECT_EQ(ds, nullptr);
}

TEST(CApi, DatasetScoringRocAndTracks) {
  atdr_test::TempDir dir;
  atdr_test::write_file(dir / "d.jsonl", kFrames);
  atdr_test::write_file(dir / "tax.json", R"({"classes": {"tank": ["AMX30", "T72"]}})");
  atdr_dataset* ds = nullptr;
  ASSERT_EQ(atdr_dataset_load((dir / "d.jsonl").c_str(), (dir / "tax.json").c_str(), &ds), ATDR_OK);
  EXPECT_EQ(atdr_dataset_frame_count(ds), 2u);
  EXPECT_EQ(atdr_dataset_truth_count(ds), 2u);
  EXPECT_EQ(atdr_dataset_detection_count(ds), 3u);

  const atdr_criterion c = atdr_criterion_default(ATDR_MATCH_JACCARD);
  atdr_detection_totals t{};
  ASSERT_EQ(atdr_score_detections(ds, &c, -INFINITY, &t), ATDR_OK);
  EXPECT_EQ(t.true_positives, 2u);
  EXPECT_EQ(t.false_alarms, 1u);
  EXPECT_DOUBLE_EQ(t.detection_rate, 1.0);
  EXPECT_DOUBLE_EQ(t.false_alarm_rate, 0.5);

  atdr_roc* roc = nullptr;
  ASSERT_EQ(atdr_roc_compute(ds, &c, &roc), ATDR_OK);
  ASSERT_EQ(atdr_roc_size(roc), 3u);
  double th, far, dr;
  ASSERT_EQ(atdr_roc_point(roc, 2, &th, &far, &dr), ATDR_OK);
  EXPECT_EQ(th, 0.4);
  EXPECT_EQ(far, 0.5);
  EXPECT_EQ(dr, 1.0);
  EXPECT_EQ(atdr_roc_point(roc, 3, &th, &far, &dr), ATDR_USAGE_ERROR);
  atdr_roc_free(roc);

  size_t fit = 0, fio = 0;
  ASSERT_EQ(atdr_track_score(ds, &c, &fit, &fio), ATDR_OK);
  EXPECT_EQ(fit, 1u);
  EXPECT_EQ(fio, 0u);

  ASSERT_EQ(atdr_dataset_save(ds, (dir / "copy.jsonl").c_str()), ATDR_OK);
  atdr_dataset* again = nullptr;
  ASSERT_EQ(atdr_dataset_load((dir / "copy.jsonl").c_str(), nullptr, &again), ATDR_OK);
  EXPECT_EQ(atdr_dataset_detection_count(again), 3u);
  atdr_dataset_free(again);
  atdr_dataset_free(ds);
  atdr_dataset_free(nullptr);
}

TEST(CApi, EndToEndJobs) {
  atdr_test::TempDir dir;
  const std::string assets = (dir / "assets").string();
  ASSERT_EQ(atdr_make_demo_assets(assets.c_str(), 3, 256), ATDR_OK) << atdr_last_error();

  const std::string recipes = assets + "/recipes.json", manifest = assets + "/manifest.json";
  const std::string db = (dir / "db").string();
  atdr_gen_scenes_options g{recipes.c_str(), manifest.c_str(), db.c_str(), 5, 2, nullptr};
  size_t produced = 0, failed = 0;
  ASSERT_EQ(atdr_gen_scenes(&g, &produced, &failed), ATDR_OK) << atdr_last_error();
  EXPECT_EQ(produced, 12u);
  EXPECT_EQ(failed, 0u);

  atdr_mock_options m = atdr_mock_options_default();
  const std::string truth = db + "/annotations.jsonl", dets = db + "/dets.jsonl";
  m.truth_path = truth.c_str();
  m.out_path = dets.c_str();
  m.seed = 2;
  m.jitter_sigma = 0.05;
  size_t frames = 0;
  ASSERT_EQ(atdr_mock_detect(&m, &frames), ATDR_OK) << atdr_last_error();
  EXPECT_EQ(frames, 12u);
  m.miss_rate = 3.0;
  EXPECT_EQ(atdr_mock_detect(&m, &frames), ATDR_USAGE_ERROR);

  atdr_eval_options e = atdr_eval_options_default();
  const std::string ev = (dir / "ev").string();
  e.dataset_path = dets.c_str();
  e.out_dir = ev.c_str();
  ASSERT_EQ(atdr_eval(&e), ATDR_OK) << atdr_last_error();
  EXPECT_TRUE(std::filesystem::exists(dir / "ev" / "summary.json"));
  e.tasks = ATDR_TASK_CLASSIFY;
  EXPECT_EQ(atdr_eval(&e), ATDR_USAGE_ERROR);

  const std::string roc = ev + "/roc.csv", rep = (dir / "rep").string();
  const char* labels[] = {"mock"};
  const char* paths[] = {roc.c_str()};
  atdr_report_options r{labels, paths, 1, rep.c_str(), "Mock", 0};
  ASSERT_EQ(atdr_report(&r), ATDR_OK) << atdr_last_error();
  EXPECT_TRUE(std::filesystem::exists(dir / "rep" / "roc_report.svg"));

  const std::string job = assets + "/sequence.json", seq = (dir / "seq").string();
  atdr_gen_sequence_options s{job.c_str(), manifest.c_str(), seq.c_str(), 1, 8, 1};
  ASSERT_EQ(atdr_gen_sequence(&s, &frames), ATDR_OK) << atdr_last_error();
  EXPECT_GT(frames, 10u);
}

TEST(CApi, PartialFailureStatus) {
  atdr_test::TempDir dir;
  const std::string assets = (dir / "assets").string();
  ASSERT_EQ(atdr_make_demo_assets(assets.c_str(), 3, 256), ATDR_OK);
  std::string text = atdr_test::slurp(dir / "assets" / "recipes.json");
  const auto pos = text.find("\"k\": 0.3");
  ASSERT_NE(pos, std::string::npos) << text.substr(0, 400);
  text.replace(pos, 8, "\"k\": 3.0");
  atdr_test::write_file(dir / "r.json", text);
  const std::string recipes = (dir / "r.json").string(), manifest = assets + "/manifest.json";
  const std::string db = (dir / "db").string();
  atdr_gen_scenes_options g{recipes.c_str(), manifest.c_str(), db.c_str(), 5, 1, ".png"};
  size_t produced = 0, failed = 0;
  EXPECT_EQ(atdr_gen_scenes(&g, &produced, &failed), ATDR_PARTIAL_FAILURE);
  EXPECT_EQ(produced, 11u);
  EXPECT_EQ(failed, 1u);
  EXPECT_NE(std::string(atdr_last_error()).find("recipe 0"), std::string::npos) << atdr_last_error();
}
