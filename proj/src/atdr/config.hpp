#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "atdr/scene_synth.hpp"
#include "atdr/sensor_model.hpp"
#include "atdr/sequence_synth.hpp"
#include "atdr/thermal_var.hpp"
#include "json.hpp"

namespace atdr {

// One entry of a recipe file, with the sensor and thermal settings that
// travel alongside the quality constraints.
struct SceneJob {
  SceneRecipe recipe;
  SensorConfig sensor;
  std::optional<ThermalScenario> thermal;
  std::string thermal_name;  // builtin name, "custom", or empty
};

// Recipe seeds default to derive_seed(job_seed, index); the sensor seed is
// always derived from the recipe seed.
SceneJob scene_job_from_json(const nlohmann::json& j, std::uint64_t job_seed, std::size_t index,
                             const std::filesystem::path& base_dir);
nlohmann::json scene_recipe_to_json(const SceneRecipe& r);

// Recipe file: JSON array of recipes, or {"recipes": [...]}.
std::vector<nlohmann::json> load_recipe_entries(const std::filesystem::path& path);

SensorConfig sensor_from_json(const nlohmann::json& j, double nu_k,
                              const std::filesystem::path& base_dir);
Trajectory trajectory_from_json(const nlohmann::json& j);
SensorGeometry geometry_from_json(const nlohmann::json& j);

// {"trajectory", "geometry", "recipe", "sensor", "sprite_library",
//  "signature", "assets", "frame_pattern", "seed"}
struct SequenceJob {
  SequenceRequest request;
  std::optional<std::filesystem::path> sprite_library;
  std::optional<std::filesystem::path> assets;
  std::optional<std::uint64_t> seed;
  bool recipe_seeded = false;  // recipe carried its own seed
};

SequenceJob load_sequence_job(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace atdr
