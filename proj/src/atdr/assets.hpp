#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "atdr/image.hpp"
#include "atdr/scene_synth.hpp"
#include "atdr/thermal_var.hpp"

namespace atdr {

// Asset manifest:
// {"backgrounds": {id: {"image": path}},
//  "sprites":     {id: {"image", "mask", "physical_height", "native_aspect",
//                       "rec_class", "id_class"}},
//  "thermal":     {id: {"ta", "tf", "regions", "region_names": {"1": name},
//                       "mask", "physical_height", "native_aspect",
//                       "rec_class", "id_class"}},
//  "sprite_library": path}
// Relative paths resolve against the manifest's directory.
struct SpriteAsset {
  std::filesystem::path image;
  std::filesystem::path mask;
  double physical_height = 2.5;
  double native_aspect = 0.0;
  std::string rec_class;
  std::string id_class;
};

struct ThermalAsset {
  std::filesystem::path ta;
  std::filesystem::path tf;
  std::filesystem::path regions;
  std::map<int, std::string> region_names;
  std::filesystem::path mask;
  double physical_height = 2.5;
  double native_aspect = 0.0;
  std::string rec_class;
  std::string id_class;
};

struct AssetManifest {
  std::filesystem::path path;
  std::map<std::string, std::filesystem::path> backgrounds;
  std::map<std::string, SpriteAsset> sprites;
  std::map<std::string, ThermalAsset> thermal;
  std::optional<std::filesystem::path> sprite_library;

  static AssetManifest load(const std::filesystem::path& path);
};

// Relative paths that do not exist are retried under $ATDR_ASSET_ROOT.
std::filesystem::path resolve_asset_path(const std::filesystem::path& path);

// Thread-safe lazy loader over a manifest.
class AssetStore {
 public:
  explicit AssetStore(AssetManifest manifest) : manifest_(std::move(manifest)) {}

  const AssetManifest& manifest() const { return manifest_; }

  std::shared_ptr<const Image> background(const std::string& id);
  // Plain sprites come back as stored. Thermal sprites need a scenario;
  // their texture is interpolated with lambdas drawn from `rng`, and the
  // drawn configuration is written to `config` when given.
  Sprite sprite(const std::string& id, const ThermalScenario* scenario = nullptr,
                Rng* rng = nullptr, ThermalConfig* config = nullptr);
  bool is_thermal(const std::string& id) const { return manifest_.thermal.count(id) != 0; }

 private:
  struct ThermalData {
    Image ta;
    Image tf;
    RegionMap regions;
    Mask mask;
  };

  AssetManifest manifest_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Image>> backgrounds_;
  std::map<std::string, std::shared_ptr<const Sprite>> sprites_;
  std::map<std::string, std::shared_ptr<const ThermalData>> thermal_;
};

}  // namespace atdr
