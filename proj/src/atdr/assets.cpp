#include "atdr/assets.hpp"

#include <cstdlib>
#include <fstream>

#include "atdr/error.hpp"
#include "json.hpp"

namespace atdr {

namespace fs = std::filesystem;

namespace {

fs::path join(const fs::path& base, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : base / p;
}

template <typename T>
T opt(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

fs::path resolve_asset_path(const fs::path& path) {
  if (path.is_absolute() || fs::exists(path)) return path;
  if (const char* root = std::getenv("ATDR_ASSET_ROOT"); root != nullptr && *root != '\0') {
    const fs::path alt = fs::path(root) / path;
    if (fs::exists(alt)) return alt;
  }
  return path;
}

AssetManifest AssetManifest::load(const fs::path& requested) {
  const fs::path path = resolve_asset_path(requested);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open asset manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("asset manifest " + path.string() + ": " + e.what());
  }
  AssetManifest m;
  m.path = path;
  const fs::path base = path.parent_path();
  try {
    if (j.contains("backgrounds")) {
      for (auto& [id, e] : j.at("backgrounds").items()) {
        m.backgrounds[id] = join(base, e.at("image").get<std::string>());
      }
    }
    if (j.contains("sprites")) {
      for (auto& [id, e] : j.at("sprites").items()) {
        SpriteAsset a;
        a.image = join(base, e.at("image").get<std::string>());
        a.mask = join(base, e.at("mask").get<std::string>());
        a.physical_height = opt(e, "physical_height", 2.5);
        a.native_aspect = opt(e, "native_aspect", 0.0);
        a.rec_class = opt<std::string>(e, "rec_class", "");
        a.id_class = opt<std::string>(e, "id_class", "");
        m.sprites[id] = a;
      }
    }
    if (j.contains("thermal")) {
      for (auto& [id, e] : j.at("thermal").items()) {
        ThermalAsset a;
        a.ta = join(base, e.at("ta").get<std::string>());
        a.tf = join(base, e.at("tf").get<std::string>());
        a.regions = join(base, e.at("regions").get<std::string>());
        for (auto& [key, name] : e.at("region_names").items()) {
          a.region_names[std::stoi(key)] = name.get<std::string>();
        }
        a.mask = join(base, e.at("mask").get<std::string>());
        a.physical_height = opt(e, "physical_height", 2.5);
        a.native_aspect = opt(e, "native_aspect", 0.0);
        a.rec_class = opt<std::string>(e, "rec_class", "");
        a.id_class = opt<std::string>(e, "id_class", "");
        m.thermal[id] = a;
      }
    }
    if (j.contains("sprite_library")) {
      m.sprite_library = join(base, j.at("sprite_library").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("asset manifest " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw DataError("asset manifest " + path.string() + ": region ids must be integers");
  }
  return m;
}

std::shared_ptr<const Image> AssetStore::background(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (auto it = backgrounds_.find(id); it != backgrounds_.end()) return it->second;
  auto it = manifest_.backgrounds.find(id);
  if (it == manifest_.backgrounds.end()) throw DataError("unknown background id '" + id + "'");
  auto img = std::make_shared<const Image>(read_image(it->second));
  backgrounds_[id] = img;
  return img;
}

Sprite AssetStore::sprite(const std::string& id, const ThermalScenario* scenario, Rng* rng,
                          ThermalConfig* config) {
  if (auto it = manifest_.sprites.find(id); it != manifest_.sprites.end()) {
    std::shared_ptr<const Sprite> cached;
    {
      std::lock_guard lock(mutex_);
      auto c = sprites_.find(id);
      if (c == sprites_.end()) {
        Sprite s;
        s.intensity = read_image(it->second.image);
        s.mask = read_mask(it->second.mask);
        s.physical_height = it->second.physical_height;
        s.native_aspect = it->second.native_aspect;
        s.recognition_class = it->second.rec_class;
        s.identification_class = it->second.id_class;
        s.validate();
        c = sprites_.emplace(id, std::make_shared<const Sprite>(std::move(s))).first;
      }
      cached = c->second;
    }
    return *cached;
  }
  auto it = manifest_.thermal.find(id);
  if (it == manifest_.thermal.end()) throw DataError("unknown sprite id '" + id + "'");
  if (scenario == nullptr || rng == nullptr) {
    throw DataError("thermal sprite '" + id + "' needs a thermal_scenario");
  }
  std::shared_ptr<const ThermalData> data;
  {
    std::lock_guard lock(mutex_);
    auto c = thermal_.find(id);
    if (c == thermal_.end()) {
      ThermalData d;
      d.ta = read_image(it->second.ta);
      d.tf = read_image(it->second.tf);
      d.regions = RegionMap::load(it->second.regions, it->second.region_names);
      d.mask = read_mask(it->second.mask);
      c = thermal_.emplace(id, std::make_shared<const ThermalData>(std::move(d))).first;
    }
    data = c->second;
  }
  const ThermalConfig drawn = sample_config(data->regions, *scenario, *rng);
  Sprite s;
  s.intensity = interpolate_texture(data->ta, data->tf, data->regions, drawn);
  s.mask = data->mask;
  s.physical_height = it->second.physical_height;
  s.native_aspect = it->second.native_aspect;
  s.recognition_class = it->second.rec_class;
  s.identification_class = it->second.id_class;
  s.validate();
  if (config != nullptr) *config = drawn;
  return s;
}

}  // namespace atdr
