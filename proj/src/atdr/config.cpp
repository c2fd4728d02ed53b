#include "atdr/config.hpp"

#include <fstream>

#include "atdr/error.hpp"
#include "atdr/rng.hpp"

namespace atdr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDefaultNetdKelvin = 0.05;

template <typename T>
T opt(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

GroundPoint point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() < 2) {
    throw DataError(std::string(what) + " must be an array [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

SensorConfig sensor_from_json(const json& j, double nu_k, const fs::path& base_dir) {
  SensorConfig s;
  s.noise_sigma = SensorConfig::noise_from_netd(kDefaultNetdKelvin, nu_k);
  if (j.is_null()) return s;
  if (!j.is_object()) throw DataError("sensor must be an object");
  s.mtf_sigma = opt(j, "mtf_sigma", s.mtf_sigma);
  s.sampling_factor = opt(j, "sampling_factor", s.sampling_factor);
  if (j.contains("noise_sigma") && j.contains("netd_kelvin")) {
    throw DataError("sensor: give noise_sigma or netd_kelvin, not both");
  }
  if (j.contains("noise_sigma")) s.noise_sigma = j.at("noise_sigma").get<double>();
  if (j.contains("netd_kelvin")) {
    s.noise_sigma = SensorConfig::noise_from_netd(j.at("netd_kelvin").get<double>(), nu_k);
  }
  if (j.contains("kernel_file")) {
    const fs::path p = j.at("kernel_file").get<std::string>();
    s.kernel = load_kernel(p.is_absolute() ? p : base_dir / p);
  }
  s.validate();
  return s;
}

SceneJob scene_job_from_json(const json& j, std::uint64_t job_seed, std::size_t index,
                             const fs::path& base_dir) {
  if (!j.is_object()) throw DataError("recipe must be an object");
  try {
    SceneJob job;
    SceneRecipe& r = job.recipe;
    r.rss = opt(j, "rss", r.rss);
    r.q_d = opt(j, "q_d", r.q_d);
    r.scr = opt(j, "scr", r.scr);
    r.r_x = opt(j, "r_x", r.r_x);
    r.k = opt(j, "k", r.k);
    r.nu_k = opt(j, "nu_k", r.nu_k);
    r.background_id = j.at("background_id").get<std::string>();
    r.target_sprite_id = j.at("target_sprite_id").get<std::string>();
    r.occultant_sprite_id = opt<std::string>(j, "occultant_sprite_id", "");
    if (j.contains("target_position")) {
      const auto p = point_from_json(j.at("target_position"), "target_position");
      r.target_x = p.x;
      r.target_y = p.y;
    } else {
      throw DataError("recipe needs target_position [x, y]");
    }
    r.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : derive_seed(job_seed, index);
    r.ring_width = opt(j, "ring_width", r.ring_width);
    r.scenario = opt<std::string>(j, "scenario", "");
    r.validate();

    job.sensor = sensor_from_json(j.contains("sensor") ? j.at("sensor") : json(), r.nu_k, base_dir);
    job.sensor.seed = derive_seed(r.seed, 0x5e5);

    if (j.contains("thermal_scenario")) {
      const auto& t = j.at("thermal_scenario");
      if (t.is_string()) {
        job.thermal_name = t.get<std::string>();
        job.thermal = builtin_scenario(job.thermal_name);
      } else {
        job.thermal_name = "custom";
        job.thermal = parse_scenario_json(t.dump());
      }
    }
    return job;
  } catch (const json::exception& e) {
    throw DataError(std::string("recipe: ") + e.what());
  }
}

json scene_recipe_to_json(const SceneRecipe& r) {
  nlohmann::ordered_json j;
  j["rss"] = r.rss;
  j["q_d"] = r.q_d;
  j["scr"] = r.scr;
  j["r_x"] = r.r_x;
  j["k"] = r.k;
  j["nu_k"] = r.nu_k;
  j["background_id"] = r.background_id;
  j["target_sprite_id"] = r.target_sprite_id;
  j["occultant_sprite_id"] = r.occultant_sprite_id;
  j["target_position"] = {r.target_x, r.target_y};
  j["seed"] = r.seed;
  j["ring_width"] = r.ring_width;
  j["scenario"] = r.scenario;
  return json::parse(j.dump());
}

std::vector<json> load_recipe_entries(const fs::path& path) {
  json j = read_json_file(path);
  if (j.is_object() && j.contains("recipes")) j = j.at("recipes");
  if (!j.is_array()) throw DataError(path.string() + ": recipe file must hold a JSON array");
  return std::vector<json>(j.begin(), j.end());
}

Trajectory trajectory_from_json(const json& j) {
  try {
    Trajectory t;
    t.kind = parse_trajectory_kind(j.at("kind").get<std::string>());
    t.start = point_from_json(j.at("start"), "trajectory.start");
    t.end = point_from_json(j.at("end"), "trajectory.end");
    t.s_amplitude = opt(j, "s_amplitude", t.s_amplitude);
    t.s_periods = opt(j, "s_periods", t.s_periods);
    t.speed = opt(j, "speed", t.speed);
    t.frame_rate = opt(j, "frame_rate", t.frame_rate);
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("trajectory: ") + e.what());
  }
}

SensorGeometry geometry_from_json(const json& j) {
  try {
    SensorGeometry g;
    const auto& p = j.at("position");
    if (!p.is_array() || p.size() < 2) throw DataError("geometry.position must be [x, y, height]");
    g.x = p[0].get<double>();
    g.y = p[1].get<double>();
    if (p.size() > 2) g.height = p[2].get<double>();
    g.focal_scale = opt(j, "focal_scale", g.focal_scale);
    if (j.contains("look_at")) g.look_at = point_from_json(j.at("look_at"), "geometry.look_at");
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw DataError(std::string("geometry: ") + e.what());
  }
}

SequenceJob load_sequence_job(const fs::path& path) {
  const json j = read_json_file(path);
  const fs::path base = path.parent_path();
  auto rel = [&](const std::string& s) {
    const fs::path p(s);
    return p.is_absolute() ? p : base / p;
  };
  try {
    SequenceJob job;
    if (j.contains("seed")) job.seed = j.at("seed").get<std::uint64_t>();
    auto& req = job.request;
    req.trajectory = trajectory_from_json(j.at("trajectory"));
    req.geometry = geometry_from_json(j.at("geometry"));
    json recipe = j.at("recipe");
    if (!recipe.contains("target_sprite_id")) recipe["target_sprite_id"] = "";
    if (!recipe.contains("target_position")) recipe["target_position"] = {0.0, 0.0};
    const SceneJob scene = scene_job_from_json(recipe, job.seed.value_or(0), 0, base);
    req.recipe = scene.recipe;
    job.recipe_seeded = recipe.contains("seed");
    req.sensor = sensor_from_json(j.contains("sensor") ? j.at("sensor") : json(), req.recipe.nu_k,
                                  base);
    req.signature = opt<std::string>(j, "signature", req.signature);
    req.frame_pattern = opt<std::string>(j, "frame_pattern", req.frame_pattern);
    if (j.contains("sprite_library")) job.sprite_library = rel(j.at("sprite_library").get<std::string>());
    if (j.contains("assets")) job.assets = rel(j.at("assets").get<std::string>());
    return job;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace atdr
