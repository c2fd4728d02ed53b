#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "atdr/image.hpp"
#include "atdr/rng.hpp"
#include "atdr/scene_synth.hpp"
#include "atdr/thermal_var.hpp"

namespace atdr {

// Procedural stand-ins for real IR assets: textured clutter backgrounds,
// vehicle silhouettes, a bush occultant, TA/TF texture pairs with a region
// map, and an aspect-indexed sprite library.

Image demo_background(int width, int height, double clutter_std, Rng& rng);

enum class DemoVehicle { tank, truck, car };
Sprite demo_vehicle(DemoVehicle kind, Rng& rng);
Sprite demo_occultant(int width, int height, Rng& rng);

// View of a box-shaped vehicle from `aspect` degrees (0 = front toward the
// viewer), 10 pixels per meter.
Sprite demo_view(double aspect, Rng& rng);

struct DemoThermal {
  Image ta;
  Image tf;
  RegionMap regions;
  Mask mask;
};
DemoThermal demo_thermal(Rng& rng);

struct DemoAssetPaths {
  std::filesystem::path manifest;
  std::filesystem::path taxonomy;
  std::filesystem::path recipes;
  std::filesystem::path sequence_job;
  std::filesystem::path library;
};

// Writes every asset plus a manifest, a taxonomy, an example recipe file
// and an example sequence job under `out_dir`.
DemoAssetPaths make_demo_assets(const std::filesystem::path& out_dir, std::uint64_t seed,
                                int background_size = 256);

}  // namespace atdr
