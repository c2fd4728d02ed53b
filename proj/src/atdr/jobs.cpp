#include "atdr/jobs.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "atdr/annotations.hpp"
#include "atdr/assets.hpp"
#include "atdr/classify_eval.hpp"
#include "atdr/config.hpp"
#include "atdr/error.hpp"
#include "atdr/parallel.hpp"
#include "atdr/reports.hpp"
#include "atdr/sensor_model.hpp"
#include "atdr/sequence_synth.hpp"
#include "atdr/track_eval.hpp"

#ifndef ATDR_VERSION_STRING
#define ATDR_VERSION_STRING "0.0.0"
#endif

namespace atdr {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kThermalStream = 0x7e4;

ordered_json input_entry(const fs::path& p) {
  return {{"path", p.string()}, {"fnv1a64", file_digest(p)}};
}

ordered_json quality_json(const QualityMetrics& q) {
  ordered_json j;
  j["rss"] = q.rss;
  j["q_d"] = q.q_d;
  j["scr"] = q.scr ? ordered_json(*q.scr) : ordered_json(nullptr);
  j["k"] = q.k ? ordered_json(*q.k) : ordered_json(nullptr);
  return j;
}

ordered_json thermal_json(const ThermalConfig& c) {
  ordered_json j = ordered_json::object();
  for (const auto& [region, state] : c) {
    j[region] = {{"mode", to_string(state.mode)}, {"lambda", state.lambda}};
  }
  return j;
}

ordered_json criterion_json(const MatchCriterion& c) {
  return {{"mode", c.mode == MatchMode::jaccard ? "jaccard" : "robin"},
          {"epsilon0", c.epsilon0},
          {"epsilon1", c.epsilon1},
          {"epsilon2", c.epsilon2},
          {"epsilon3", c.epsilon3}};
}

std::string scene_name(std::size_t index, const std::string& ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "scene_%06zu", index);
  return std::string(buf) + ext;
}

bool within(double measured, double requested, double rel) {
  return std::abs(measured - requested) <= rel * std::abs(requested);
}

}  // namespace

const char* version() { return ATDR_VERSION_STRING; }

std::optional<std::string> check_round_trip(const SceneRecipe& r, const ComposedScene& scene) {
  const auto& m = scene.measured;
  std::ostringstream msg;
  if (!within(m.rss, r.rss, kQualityTolerance)) {
    msg << "measured RSS " << m.rss << " vs requested " << r.rss;
  } else if (!m.scr || !within(*m.scr, r.scr, kQualityTolerance)) {
    msg << "measured SCR " << (m.scr ? format_number(*m.scr) : "undefined") << " vs requested "
        << r.scr;
  } else if (!m.k || std::abs(*m.k - r.k) > kQualityTolerance * std::abs(r.k) + 1e-6) {
    msg << "measured K " << (m.k ? format_number(*m.k) : "undefined") << " vs requested " << r.k;
  } else if (!within(scene.q_d_full, r.q_d, kQdTolerance)) {
    msg << "measured Q_D " << scene.q_d_full << " vs requested " << r.q_d;
  } else if (std::abs(scene.truth.occlusion_fraction - r.r_x) > kOcclusionTolerance + 1e-12) {
    msg << "achieved R_x " << scene.truth.occlusion_fraction << " vs requested " << r.r_x;
  } else {
    return std::nullopt;
  }
  return msg.str();
}

GenScenesResult gen_scenes(const GenScenesOptions& options) {
  const auto entries = load_recipe_entries(options.recipes);
  AssetStore store(AssetManifest::load(options.assets));
  const fs::path images_dir = options.out_dir / "images";
  fs::create_directories(images_dir);
  const fs::path base_dir = options.recipes.parent_path();

  struct Outcome {
    bool ok = false;
    std::string error;
    FrameRecord record;
    ordered_json info;
  };
  std::vector<Outcome> outcomes(entries.size());

  parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
    Outcome& out = outcomes[i];
    try {
      const SceneJob job = scene_job_from_json(entries[i], options.seed, i, base_dir);
      const SceneRecipe& r = job.recipe;
      const auto background = store.background(r.background_id);
      Rng thermal_rng = make_rng(r.seed, kThermalStream);
      ThermalConfig drawn;
      const Sprite target =
          store.sprite(r.target_sprite_id, job.thermal ? &*job.thermal : nullptr, &thermal_rng, &drawn);
      std::optional<Sprite> occultant;
      if (!r.occultant_sprite_id.empty()) occultant = store.sprite(r.occultant_sprite_id);

      ComposeOptions copt;
      copt.object_id = 1;
      const ComposedScene scene =
          compose_scene(r, *background, target, occultant ? &*occultant : nullptr, copt);
      if (auto bad = check_round_trip(r, scene)) throw DataError("round-trip check failed: " + *bad);

      const SensorOutput sensed = apply_sensor(scene.image, job.sensor);
      const std::string rel = "images/" + scene_name(i, options.image_extension);
      write_image(options.out_dir / rel, sensed.image);

      out.record.frame_index = static_cast<std::int64_t>(i);
      out.record.image_path = rel;
      ObjectTruth truth = scene.truth;
      truth.bbox = sensed.geometry.apply(truth.bbox);
      out.record.truths.push_back(truth);

      ordered_json info;
      info["frame"] = i;
      info["image"] = rel;
      info["scenario"] = r.scenario;
      info["seed"] = r.seed;
      info["recipe"] = scene_recipe_to_json(r);
      ordered_json measured = quality_json(scene.measured);
      measured["q_d_full"] = scene.q_d_full;
      measured["r_x"] = scene.truth.occlusion_fraction;
      measured["full_surface"] = scene.full_surface;
      measured["visible_surface"] = scene.visible_surface;
      measured["clamped_fraction"] = scene.clamped_fraction;
      info["measured"] = measured;
      info["gains"] = {{"target", {scene.target_transform.gain, scene.target_transform.offset}},
                       {"background",
                        {scene.background_transform.gain, scene.background_transform.offset}}};
      info["sensor"] = {{"mtf_sigma", job.sensor.mtf_sigma},
                        {"sampling_factor", job.sensor.sampling_factor},
                        {"noise_sigma", job.sensor.noise_sigma},
                        {"custom_kernel", job.sensor.kernel.has_value()}};
      if (job.thermal) {
        info["thermal"] = {{"scenario", job.thermal_name}, {"regions", thermal_json(drawn)}};
      }
      out.info = std::move(info);
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  GenScenesResult result;
  std::vector<FrameRecord> records;
  ordered_json scenes = ordered_json::array();
  ordered_json failures = ordered_json::array();
  std::map<std::string, ordered_json> per_scenario;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (!o.ok) {
      result.failures.push_back({i, o.error});
      failures.push_back({{"index", i}, {"error", o.error}});
      continue;
    }
    ++result.produced;
    const std::string scenario = o.info["scenario"].get<std::string>();
    auto& agg = per_scenario[scenario];
    if (agg.is_null()) {
      agg = {{"count", 0}, {"rss", ordered_json::array()}, {"scr", ordered_json::array()},
             {"r_x", ordered_json::array()}, {"k", ordered_json::array()}};
    }
    agg["count"] = agg["count"].get<int>() + 1;
    for (const char* key : {"rss", "scr", "r_x", "k"}) {
      const double v = o.info["recipe"][key].get<double>();
      auto& arr = agg[key];
      bool seen = false;
      for (const auto& x : arr) seen = seen || x.get<double>() == v;
      if (!seen) arr.push_back(v);
    }
    records.push_back(std::move(o.record));
    scenes.push_back(std::move(o.info));
  }

  save_dataset(options.out_dir / "annotations.jsonl", records);

  ordered_json manifest;
  manifest["tool"] = "atdr";
  manifest["version"] = version();
  manifest["command"] = "gen-scenes";
  manifest["seed"] = options.seed;
  manifest["inputs"] = {{"recipes", input_entry(options.recipes)},
                        {"assets", input_entry(store.manifest().path)}};
  manifest["produced"] = result.produced;
  manifest["annotations"] = "annotations.jsonl";
  ordered_json scenarios = ordered_json::object();
  for (auto& [name, agg] : per_scenario) scenarios[name] = agg;
  manifest["scenarios"] = scenarios;
  manifest["scenes"] = scenes;
  manifest["failures"] = failures;
  write_text(options.out_dir / "manifest.json", manifest.dump(2));
  return result;
}

std::size_t gen_sequence(const GenSequenceOptions& options) {
  SequenceJob job = load_sequence_job(options.job);
  const std::optional<std::uint64_t> seed = job.seed ? job.seed : options.seed;
  if (!seed) throw UsageError("gen-sequence needs a seed (--seed or \"seed\" in the job file)");
  auto& req = job.request;
  if (!job.recipe_seeded) req.recipe.seed = derive_seed(*seed, 0);
  req.sensor.seed = derive_seed(*seed, 0x5e5);

  const std::optional<fs::path> assets_path = job.assets ? job.assets : options.assets;
  if (!assets_path) throw UsageError("gen-sequence needs an asset manifest (--assets or \"assets\")");
  AssetStore store(AssetManifest::load(*assets_path));
  const auto library_path = job.sprite_library ? job.sprite_library : store.manifest().sprite_library;
  if (!library_path) throw UsageError("gen-sequence needs a sprite library");
  const SpriteLibrary library = SpriteLibrary::load(*library_path);

  const auto background = store.background(req.recipe.background_id);
  std::optional<Sprite> occultant;
  if (!req.recipe.occultant_sprite_id.empty()) occultant = store.sprite(req.recipe.occultant_sprite_id);

  const RenderedSequence seq =
      render_sequence(req, library, *background, occultant ? &*occultant : nullptr, options.jobs);

  fs::create_directories(options.out_dir);
  parallel_for(seq.frames.size(), options.jobs, [&](std::size_t i) {
    const fs::path p = options.out_dir / seq.annotations[i].image_path;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_image(p, seq.frames[i]);
  });
  save_dataset(options.out_dir / "annotations.jsonl", seq.annotations);

  ordered_json frames = ordered_json::array();
  for (std::size_t i = 0; i < seq.info.size(); ++i) {
    const auto& f = seq.info[i];
    ordered_json j;
    j["frame"] = i;
    j["image"] = seq.annotations[i].image_path;
    j["position"] = {f.sample.position.x, f.sample.position.y};
    j["heading"] = f.sample.heading;
    j["aspect"] = f.sample.aspect;
    j["bucket_aspect"] = f.bucket_aspect;
    j["range"] = f.sample.range;
    j["apparent_height"] = f.apparent_height;
    j["measured"] = quality_json(f.measured);
    j["q_d_full"] = f.q_d;
    j["r_x"] = f.achieved_rx;
    frames.push_back(std::move(j));
  }
  ordered_json manifest;
  manifest["tool"] = "atdr";
  manifest["version"] = version();
  manifest["command"] = "gen-sequence";
  manifest["seed"] = *seed;
  manifest["inputs"] = {{"job", input_entry(options.job)},
                        {"assets", input_entry(store.manifest().path)},
                        {"sprite_library", input_entry(*library_path)}};
  manifest["recipe"] = scene_recipe_to_json(req.recipe);
  manifest["frames"] = frames;
  write_text(options.out_dir / "manifest.json", manifest.dump(2));
  return seq.frames.size();
}

std::size_t run_mock(const MockOptions& options) {
  std::optional<ClassTaxonomy> taxonomy;
  if (options.taxonomy) taxonomy = ClassTaxonomy::load(*options.taxonomy);
  const auto frames = load_dataset(options.truth, taxonomy ? &*taxonomy : nullptr);
  const auto out = mock_detect(frames, options.config, taxonomy ? &*taxonomy : nullptr,
                               options.truth.parent_path());
  if (options.out.has_parent_path()) fs::create_directories(options.out.parent_path());
  save_dataset(options.out, out);
  return out.size();
}

nlohmann::json run_eval(const EvalOptions& options) {
  options.criterion.validate();
  if ((options.tasks & (kTaskDetect | kTaskClassify | kTaskTrack)) == 0) {
    throw UsageError("no evaluation task selected");
  }
  std::optional<ClassTaxonomy> taxonomy;
  if (options.taxonomy) taxonomy = ClassTaxonomy::load(*options.taxonomy);
  if ((options.tasks & kTaskClassify) && !taxonomy) {
    throw UsageError("classification needs a taxonomy (--taxonomy)");
  }
  const auto frames = load_dataset(options.dataset, taxonomy ? &*taxonomy : nullptr);
  if ((options.tasks & kTaskTrack) && !has_tracker_ids(frames)) {
    throw DataError("track evaluation requested but no detection carries a tracker id");
  }
  fs::create_directories(options.out_dir);

  ordered_json summary;
  summary["tool"] = "atdr";
  summary["version"] = version();
  summary["command"] = "eval";
  summary["seed"] = options.seed;
  ordered_json inputs = {{"dataset", input_entry(options.dataset)}};
  if (options.taxonomy) inputs["taxonomy"] = input_entry(*options.taxonomy);
  if (options.group_manifest) inputs["group_manifest"] = input_entry(*options.group_manifest);
  summary["inputs"] = inputs;
  summary["criterion"] = criterion_json(options.criterion);
  summary["frames"] = frames.size();

  if (options.tasks & kTaskDetect) {
    const auto report = score_detections(frames, options.criterion, options.min_confidence);
    write_text(options.out_dir / "detections.csv", detection_to_csv(report, frames));
    std::vector<NamedCurve> curves;
    ordered_json detect;
    detect["min_confidence"] = format_number(options.min_confidence);
    detect["truths"] = report.truth_count;
    detect["dr"] = report.detection_rate();
    detect["far"] = report.false_alarm_rate();
    detect["tp"] = report.totals.true_positives;
    detect["fa"] = report.totals.false_alarms;
    detect["missed"] = report.totals.missed;
    detect["mt"] = report.totals.mt_count;
    detect["mo"] = report.totals.mo_count;
    const RocCurve all = roc_curve(frames, options.criterion);
    write_text(options.out_dir / "roc.csv", roc_to_csv(all));
    detect["roc_csv"] = "roc.csv";
    detect["roc_points"] = all.points.size();

    if (options.group_manifest) {
      const auto manifest = read_json_file(*options.group_manifest);
      std::map<std::int64_t, std::string> scenario_of;
      for (const auto& s : manifest.at("scenes")) {
        scenario_of[s.at("frame").get<std::int64_t>()] = s.value("scenario", std::string());
      }
      std::map<std::string, std::vector<FrameRecord>> groups;
      for (const auto& f : frames) {
        auto it = scenario_of.find(f.frame_index);
        if (it == scenario_of.end()) {
          throw DataError("frame " + std::to_string(f.frame_index) + " is not in the manifest");
        }
        groups[it->second].push_back(f);
      }
      ordered_json by_group = ordered_json::object();
      for (const auto& [name, subset] : groups) {
        const std::string label = name.empty() ? "unnamed" : name;
        const RocCurve c = roc_curve(subset, options.criterion);
        const std::string file = "roc_" + label + ".csv";
        write_text(options.out_dir / file, roc_to_csv(c));
        const auto r = score_detections(subset, options.criterion, options.min_confidence);
        by_group[label] = {{"frames", subset.size()},
                           {"dr", r.detection_rate()},
                           {"far", r.false_alarm_rate()},
                           {"roc_csv", file}};
        curves.push_back({label, c});
      }
      detect["groups"] = by_group;
    } else {
      curves.push_back({"all", all});
    }
    write_text(options.out_dir / "roc.svg", roc_to_svg(curves, "ROC"));
    summary["detect"] = detect;
  }

  if (options.tasks & kTaskClassify) {
    ordered_json classify;
    for (auto [level, name] : {std::pair{ClassLevel::recognition, "recognition"},
                               std::pair{ClassLevel::identification, "identification"}}) {
      const auto m = confusion(frames, options.criterion, level, *taxonomy);
      const std::string file = std::string("confusion_") + name + ".csv";
      write_text(options.out_dir / file, m.to_csv());
      classify[name] = {{"matrix_csv", file},
                        {"rates", ordered_json::parse(classification_rates(m).to_json())}};
    }
    summary["classify"] = classify;
  }

  if (options.tasks & kTaskTrack) {
    const auto score = score_tracks(frames, options.criterion);
    write_text(options.out_dir / "track.json", score.to_json());
    summary["track"] = {{"fit", score.fit_count}, {"fio", score.fio_count}, {"report", "track.json"}};
  }

  write_text(options.out_dir / "summary.json", summary.dump(2));
  return nlohmann::json::parse(summary.dump());
}

void run_report(const ReportOptions& options) {
  if (options.curves.empty()) throw UsageError("report needs at least one ROC CSV");
  fs::create_directories(options.out_dir);
  std::vector<NamedCurve> curves;
  std::ostringstream merged;
  merged << "label,threshold,far,dr\n";
  ordered_json inputs = ordered_json::object();
  for (const auto& [label, path] : options.curves) {
    NamedCurve c{label, roc_from_csv(read_text(path))};
    for (const auto& p : c.curve.points) {
      merged << label << ',' << format_number(p.threshold) << ',' << format_number(p.far) << ','
             << format_number(p.dr) << '\n';
    }
    inputs[label] = input_entry(path);
    curves.push_back(std::move(c));
  }
  write_text(options.out_dir / "roc_report.csv", merged.str());
  write_text(options.out_dir / "roc_report.svg", roc_to_svg(curves, options.title));
  ordered_json report;
  report["tool"] = "atdr";
  report["version"] = version();
  report["command"] = "report";
  report["seed"] = options.seed;
  report["inputs"] = inputs;
  report["outputs"] = {"roc_report.csv", "roc_report.svg"};
  write_text(options.out_dir / "report.json", report.dump(2));
}

}  // namespace atdr
