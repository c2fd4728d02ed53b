#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atdr/detect_eval.hpp"
#include "atdr/mock_detector.hpp"
#include "atdr/scene_synth.hpp"
#include "json.hpp"

namespace atdr {

const char* version();

// Round-trip tolerances for generated scenes: RSS, SCR and K relative,
// Q_D relative, R_x absolute.
inline constexpr double kQualityTolerance = 0.02;
inline constexpr double kQdTolerance = 0.04;

// Returns a description of the first violated tolerance, or nullopt.
std::optional<std::string> check_round_trip(const SceneRecipe& requested, const ComposedScene& scene);

struct GenScenesOptions {
  std::filesystem::path recipes;
  std::filesystem::path assets;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string image_extension = ".pgm";
};

struct GenFailure {
  std::size_t index = 0;
  std::string message;
};

struct GenScenesResult {
  std::size_t produced = 0;
  std::vector<GenFailure> failures;
};

// Writes images/, annotations.jsonl and manifest.json. Failing recipes are
// reported in the result and the manifest; the others are still written.
GenScenesResult gen_scenes(const GenScenesOptions& options);

struct GenSequenceOptions {
  std::filesystem::path job;
  std::optional<std::filesystem::path> assets;  // used when the job names none
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // the job's own seed takes precedence
  unsigned jobs = 1;
};

std::size_t gen_sequence(const GenSequenceOptions& options);

struct MockOptions {
  std::filesystem::path truth;
  std::filesystem::path out;
  std::optional<std::filesystem::path> taxonomy;
  MockConfig config;
};

std::size_t run_mock(const MockOptions& options);

enum EvalTask : unsigned { kTaskDetect = 1u, kTaskClassify = 2u, kTaskTrack = 4u };

struct EvalOptions {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> taxonomy;
  std::filesystem::path out_dir;
  MatchCriterion criterion;
  unsigned tasks = kTaskDetect;
  std::uint64_t seed = 0;
  // Generation manifest; splits the ROC by scenario when given.
  std::optional<std::filesystem::path> group_manifest;
  double min_confidence = -std::numeric_limits<double>::infinity();
};

// Writes the report files and summary.json; returns the summary.
nlohmann::json run_eval(const EvalOptions& options);

struct ReportOptions {
  std::vector<std::pair<std::string, std::filesystem::path>> curves;  // label, ROC CSV
  std::filesystem::path out_dir;
  std::string title = "ROC";
  std::uint64_t seed = 0;
};

// Merges ROC CSVs into roc_report.csv / roc_report.svg plus report.json.
void run_report(const ReportOptions& options);

}  // namespace atdr
