// atdr command-line tool. Every subcommand is a thin wrapper over the C API;
// the process exit code is the returned atdr_status.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "atdr/atdr.h"
#include "json.hpp"

namespace {

const char* const kSubcommands[] = {"gen-scenes", "gen-sequence", "mock-detect",
                                    "eval",       "report",       "make-assets"};

bool is_subcommand(const std::string& s) {
  for (const char* name : kSubcommands) {
    if (s == name) return true;
  }
  return false;
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Settings from a subcommand's --config JSON file are appended after the
// command line, so they win over flags given there.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::size_t sub = 0;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (is_subcommand(args[i])) {
      sub = i;
      break;
    }
  }
  if (sub == 0) return args;
  std::optional<std::string> path;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + *path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ValidationError("--config", *path + ": " + e.what());
  }
  if (!cfg.is_object()) throw CLI::ValidationError("--config", *path + " must hold a JSON object");
  for (auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      args.push_back(flag + "=" + json_scalar(value));
    } else if (value.is_array()) {
      for (const auto& item : value) {
        args.push_back(flag);
        args.push_back(json_scalar(item));
      }
    } else {
      args.push_back(flag);
      args.push_back(json_scalar(value));
    }
  }
  return args;
}

int report_status(atdr_status s) {
  if (s != ATDR_OK) {
    const char* kind = s == ATDR_USAGE_ERROR    ? "usage error"
                       : s == ATDR_DATA_ERROR   ? "data error"
                       : s == ATDR_PARTIAL_FAILURE ? "partial failure"
                                                   : "internal error";
    std::cerr << "atdr: " << kind << ": " << atdr_last_error() << '\n';
  }
  return static_cast<int>(s);
}

std::string default_assets() {
  if (const char* root = std::getenv("ATDR_ASSET_ROOT"); root != nullptr && *root != '\0') {
    return std::string(root) + "/manifest.json";
  }
  return "";
}

const char* c_str_or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target detection/recognition/tracking evaluation and IR scene synthesis"};
  app.set_version_flag("--version", std::string(atdr_version()));
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config;
  unsigned jobs = 1;
  std::uint64_t seed = 0;

  // gen-scenes
  auto* gen = app.add_subcommand("gen-scenes", "Composite scenes from a recipe file");
  std::string gen_recipes, gen_assets = default_assets(), gen_out, gen_format = "pgm";
  gen->add_option("--recipes", gen_recipes, "Recipe JSON array")->required();
  gen->add_option("--assets", gen_assets, "Asset manifest (default $ATDR_ASSET_ROOT/manifest.json)");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", seed, "Job seed")->required();
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_option("--format", gen_format, "Image format")->check(CLI::IsMember({"pgm", "png"}));
  gen->add_option("--config", config, "JSON file whose keys override these flags");

  // gen-sequence
  auto* seq = app.add_subcommand("gen-sequence", "Render a moving-target sequence");
  std::string seq_job, seq_assets = default_assets(), seq_out;
  auto* seq_seed = seq->add_option("--seed", seed, "Job seed (the job file's seed wins)");
  seq->add_option("--job", seq_job, "Sequence job JSON")->required();
  seq->add_option("--assets", seq_assets, "Asset manifest when the job names none");
  seq->add_option("--out", seq_out, "Output directory")->required();
  seq->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  seq->add_option("--config", config, "JSON file whose keys override these flags");

  // mock-detect
  auto* mock = app.add_subcommand("mock-detect", "Perturb ground truth into synthetic detections");
  atdr_mock_options mo = atdr_mock_options_default();
  std::string mock_truth, mock_out, mock_taxonomy;
  bool quality_aware = false;
  mock->add_option("--truth", mock_truth, "Ground-truth JSONL")->required();
  mock->add_option("--out", mock_out, "Output JSONL")->required();
  mock->add_option("--seed", seed, "Seed")->required();
  mock->add_option("--taxonomy", mock_taxonomy, "Class taxonomy JSON");
  mock->add_option("--jitter", mo.jitter_sigma, "Center jitter std (fraction of W, H)")
      ->check(CLI::NonNegativeNumber);
  mock->add_option("--miss-rate", mo.miss_rate)->check(CLI::Range(0.0, 1.0));
  mock->add_option("--clutter-rate", mo.clutter_rate, "Mean clutter boxes per frame")
      ->check(CLI::Range(0.0, 1.0));
  mock->add_option("--classify-accuracy", mo.classify_accuracy)->check(CLI::Range(0.0, 1.0));
  mock->add_option("--track-switch-rate", mo.track_switch_rate)->check(CLI::Range(0.0, 1.0));
  mock->add_option("--width", mo.image_width, "Clutter extent when images are missing");
  mock->add_option("--height", mo.image_height);
  mock->add_flag("--quality-aware", quality_aware, "Degrade with occlusion and local SCR");
  mock->add_option("--scr-half", mo.scr_half, "SCR at which visibility halves");
  mock->add_option("--config", config, "JSON file whose keys override these flags");

  // eval
  auto* ev = app.add_subcommand("eval", "Score detections, classes and tracks");
  atdr_eval_options eo = atdr_eval_options_default();
  std::string ev_dataset, ev_taxonomy, ev_out, ev_group, ev_mode = "jaccard";
  std::vector<std::string> ev_tasks{"detect"};
  ev->add_option("--dataset", ev_dataset, "Truth + detections JSONL")->required();
  ev->add_option("--taxonomy", ev_taxonomy, "Class taxonomy JSON (needed for classify)");
  ev->add_option("--out", ev_out, "Report directory")->required();
  ev->add_option("--tasks", ev_tasks, "detect, classify, track")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::IsMember({"detect", "classify", "track"}));
  ev->add_option("--mode", ev_mode, "Match criterion")->check(CLI::IsMember({"jaccard", "robin"}));
  ev->add_option("--eps0", eo.criterion.epsilon0, "Jaccard threshold");
  ev->add_option("--eps1", eo.criterion.epsilon1, "Localization threshold");
  ev->add_option("--eps2", eo.criterion.epsilon2, "Scale threshold");
  ev->add_option("--eps3", eo.criterion.epsilon3, "Aspect threshold");
  ev->add_option("--min-confidence", eo.min_confidence, "Operating point for per-frame counts");
  ev->add_option("--group-by", ev_group, "Generation manifest; one ROC per scenario");
  ev->add_option("--seed", seed, "Seed recorded in the summary");
  ev->add_option("--config", config, "JSON file whose keys override these flags");

  // report
  auto* rep = app.add_subcommand("report", "Merge ROC CSVs into one plot");
  std::vector<std::string> rep_curves;
  std::string rep_out, rep_title = "ROC";
  rep->add_option("--roc", rep_curves, "label=path/to/roc.csv")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rep->add_option("--out", rep_out, "Output directory")->required();
  rep->add_option("--title", rep_title);
  rep->add_option("--seed", seed, "Seed recorded in the report");
  rep->add_option("--config", config, "JSON file whose keys override these flags");

  // make-assets
  auto* mk = app.add_subcommand("make-assets", "Write procedural demo assets");
  std::string mk_out;
  int mk_size = 256;
  mk->add_option("--out", mk_out, "Output directory")->required();
  mk->add_option("--seed", seed, "Seed");
  mk->add_option("--size", mk_size, "Background side in pixels")->check(CLI::Range(64, 8192));

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<char*> ptrs;
    for (auto& a : args) ptrs.push_back(a.data());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ATDR_USAGE_ERROR;
  }

  if (gen->parsed()) {
    if (gen_assets.empty()) {
      std::cerr << "atdr: usage error: --assets not given and ATDR_ASSET_ROOT unset\n";
      return ATDR_USAGE_ERROR;
    }
    const std::string ext = "." + gen_format;
    atdr_gen_scenes_options o{gen_recipes.c_str(), gen_assets.c_str(), gen_out.c_str(), seed, jobs,
                              ext.c_str()};
    size_t produced = 0, failed = 0;
    const atdr_status s = atdr_gen_scenes(&o, &produced, &failed);
    if (s == ATDR_OK || s == ATDR_PARTIAL_FAILURE) {
      std::cout << "generated " << produced << " scene(s), " << failed << " failure(s) in "
                << gen_out << '\n';
    }
    return report_status(s);
  }
  if (seq->parsed()) {
    atdr_gen_sequence_options o{seq_job.c_str(), c_str_or_null(seq_assets), seq_out.c_str(),
                                seq_seed->count() > 0 ? 1 : 0, seed, jobs};
    size_t frames = 0;
    const atdr_status s = atdr_gen_sequence(&o, &frames);
    if (s == ATDR_OK) std::cout << "rendered " << frames << " frame(s) in " << seq_out << '\n';
    return report_status(s);
  }
  if (mock->parsed()) {
    mo.truth_path = mock_truth.c_str();
    mo.out_path = mock_out.c_str();
    mo.taxonomy_path = c_str_or_null(mock_taxonomy);
    mo.seed = seed;
    mo.quality_aware = quality_aware ? 1 : 0;
    size_t frames = 0;
    const atdr_status s = atdr_mock_detect(&mo, &frames);
    if (s == ATDR_OK) std::cout << "wrote " << frames << " frame(s) to " << mock_out << '\n';
    return report_status(s);
  }
  if (ev->parsed()) {
    eo.dataset_path = ev_dataset.c_str();
    eo.taxonomy_path = c_str_or_null(ev_taxonomy);
    eo.out_dir = ev_out.c_str();
    eo.group_manifest_path = c_str_or_null(ev_group);
    eo.criterion.mode = ev_mode == "robin" ? ATDR_MATCH_ROBIN : ATDR_MATCH_JACCARD;
    eo.tasks = 0;
    for (const auto& t : ev_tasks) {
      if (t == "detect") eo.tasks |= ATDR_TASK_DETECT;
      if (t == "classify") eo.tasks |= ATDR_TASK_CLASSIFY;
      if (t == "track") eo.tasks |= ATDR_TASK_TRACK;
    }
    eo.seed = seed;
    const atdr_status s = atdr_eval(&eo);
    if (s == ATDR_OK) std::cout << "reports written to " << ev_out << '\n';
    return report_status(s);
  }
  if (rep->parsed()) {
    std::vector<std::string> labels, paths;
    for (const auto& c : rep_curves) {
      const auto eq = c.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == c.size()) {
        std::cerr << "atdr: usage error: --roc expects label=path, got '" << c << "'\n";
        return ATDR_USAGE_ERROR;
      }
      labels.push_back(c.substr(0, eq));
      paths.push_back(c.substr(eq + 1));
    }
    std::vector<const char*> lp, pp;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      lp.push_back(labels[i].c_str());
      pp.push_back(paths[i].c_str());
    }
    atdr_report_options o{lp.data(), pp.data(), lp.size(), rep_out.c_str(), rep_title.c_str(), seed};
    const atdr_status s = atdr_report(&o);
    if (s == ATDR_OK) std::cout << "report written to " << rep_out << '\n';
    return report_status(s);
  }
  if (mk->parsed()) {
    const atdr_status s = atdr_make_demo_assets(mk_out.c_str(), seed, mk_size);
    if (s == ATDR_OK) std::cout << "demo assets written to " << mk_out << '\n';
    return report_status(s);
  }
  return ATDR_USAGE_ERROR;
}
