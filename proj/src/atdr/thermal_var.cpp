#include "atdr/thermal_var.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "atdr/error.hpp"
#include "json.hpp"

namespace atdr {

ThermalMode parse_thermal_mode(const std::string& name) {
  if (name == "ambient" || name == "TA") return ThermalMode::ambient;
  if (name == "intermediate" || name == "TI") return ThermalMode::intermediate;
  if (name == "operational" || name == "TF") return ThermalMode::operational;
  throw DataError("unknown thermal mode '" + name + "'");
}

const char* to_string(ThermalMode mode) {
  switch (mode) {
    case ThermalMode::ambient: return "ambient";
    case ThermalMode::intermediate: return "intermediate";
    case ThermalMode::operational: return "operational";
  }
  return "?";
}

LambdaInterval mode_interval(ThermalMode mode) {
  switch (mode) {
    case ThermalMode::ambient: return {0.0, 0.1, true, true};
    case ThermalMode::intermediate: return {0.1, 0.9, false, false};
    case ThermalMode::operational: return {0.9, 1.0, true, true};
  }
  throw DataError("invalid thermal mode");
}

GaussianLaw mode_law(ThermalMode mode) {
  switch (mode) {
    case ThermalMode::ambient: return {0.0, kSigmaAmbient};
    case ThermalMode::intermediate: return {0.5, kSigmaIntermediate};
    case ThermalMode::operational: return {1.0, kSigmaOperational};
  }
  throw DataError("invalid thermal mode");
}

double GaussianLaw::density(double lambda) const {
  const double z = (lambda - center) / sigma;
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
}

double sample_lambda(ThermalMode mode, Rng& rng, std::size_t* attempts) {
  const GaussianLaw law = mode_law(mode);
  const LambdaInterval interval = mode_interval(mode);
  std::normal_distribution<double> normal(0.0, law.sigma);
  for (;;) {
    if (attempts != nullptr) ++*attempts;
    const double z = normal(rng);
    double lambda = 0.0;
    switch (mode) {
      case ThermalMode::ambient: lambda = std::abs(z); break;
      case ThermalMode::operational: lambda = 1.0 - std::abs(z); break;
      case ThermalMode::intermediate: lambda = 0.5 + z; break;
    }
    if (interval.contains(lambda)) return lambda;
  }
}

void RegionMap::validate() const {
  if (labels.empty()) throw DataError("region map is empty");
  for (std::size_t i = 1; i <= region_names.size(); ++i) {
    if (region_names.count(static_cast<int>(i)) == 0) {
      throw DataError("region ids must run densely from 1; missing " + std::to_string(i));
    }
  }
  std::set<std::string> seen;
  for (const auto& [id, name] : region_names) {
    const auto& known = known_region_names();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw DataError("unknown region name '" + name + "'");
    }
    if (!seen.insert(name).second) throw DataError("region name '" + name + "' used twice");
  }
  for (int v : labels.pixels()) {
    if (region_names.count(v) == 0) {
      throw DataError("region map pixel labelled " + std::to_string(v) + " has no region name");
    }
  }
}

RegionMap RegionMap::load(const std::filesystem::path& label_image,
                          const std::map<int, std::string>& names) {
  const Image img = read_image(label_image);
  RegionMap map;
  map.labels = Grid<int>(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) map.labels[i] = static_cast<int>(std::lround(img[i]));
  map.region_names = names;
  map.validate();
  return map;
}

ThermalScenario builtin_scenario(const std::string& name) {
  const auto all = [](ThermalMode m) {
    ThermalScenario s;
    for (const auto& r : known_region_names()) s[r] = m;
    return s;
  };
  if (name == "motionless") return all(ThermalMode::ambient);
  if (name == "in_motion") return all(ThermalMode::operational);
  if (name == "warming") return all(ThermalMode::intermediate);
  if (name == "standby") {
    auto s = all(ThermalMode::ambient);
    s["engine"] = ThermalMode::operational;
    s["muffler"] = ThermalMode::operational;
    return s;
  }
  if (name == "just_stopped") {
    auto s = all(ThermalMode::intermediate);
    s["engine"] = ThermalMode::operational;
    s["muffler"] = ThermalMode::operational;
    s["windows"] = ThermalMode::ambient;
    return s;
  }
  throw DataError("unknown thermal scenario '" + name + "'");
}

ThermalScenario parse_scenario_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw DataError("scenario must be an object {region: mode}");
  ThermalScenario s;
  for (auto& [region, mode] : j.items()) {
    if (!mode.is_string()) throw DataError("scenario mode for '" + region + "' must be a string");
    s[region] = parse_thermal_mode(mode.get<std::string>());
  }
  return s;
}

Image interpolate_texture(const Image& ta, const Image& tf, const RegionMap& regions,
                          const ThermalConfig& config) {
  if (ta.width() != tf.width() || ta.height() != tf.height() ||
      ta.width() != regions.labels.width() || ta.height() != regions.labels.height()) {
    throw DataError("TA, TF and region map dimensions differ");
  }
  std::map<int, double> lambda_of;
  for (const auto& [id, name] : regions.region_names) {
    auto it = config.find(name);
    if (it == config.end()) throw DataError("thermal config has no state for region '" + name + "'");
    lambda_of[id] = it->second.lambda;
  }
  Image out(ta.width(), ta.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::lerp(ta[i], tf[i], lambda_of.at(regions.labels[i]));
  }
  return out;
}

ThermalConfig sample_config(const RegionMap& regions, const ThermalScenario& scenario, Rng& rng) {
  ThermalConfig config;
  for (const auto& [id, name] : regions.region_names) {
    auto it = scenario.find(name);
    if (it == scenario.end()) throw DataError("scenario assigns no mode to region '" + name + "'");
    config[name] = {it->second, sample_lambda(it->second, rng)};
  }
  return config;
}

std::vector<Signature> make_signature_set(const Image& ta, const Image& tf,
                                          const RegionMap& regions,
                                          const ThermalScenario& scenario, std::size_t count,
                                          Rng& rng) {
  regions.validate();
  std::vector<Signature> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Signature s;
    s.config = sample_config(regions, scenario, rng);
    s.texture = interpolate_texture(ta, tf, regions, s.config);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace atdr
