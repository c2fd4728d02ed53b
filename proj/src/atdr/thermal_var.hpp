#pragma once

#include <map>
#include <string>
#include <vector>

#include "atdr/image.hpp"
#include "atdr/rng.hpp"

namespace atdr {

// Thermal state of one vehicle region, as a mixing rate lambda between the
// ambient (TA, lambda = 0) and operating (TF, lambda = 1) textures.
enum class ThermalMode { ambient, intermediate, operational };

ThermalMode parse_thermal_mode(const std::string& name);
const char* to_string(ThermalMode mode);

struct LambdaInterval {
  double low;
  double high;
  bool low_closed;
  bool high_closed;
  bool contains(double v) const {
    return (low_closed ? v >= low : v > low) && (high_closed ? v <= high : v < high);
  }
};

// [0, 0.1], (0.1, 0.9), [0.9, 1].
LambdaInterval mode_interval(ThermalMode mode);

// Gaussian law behind each mode: centered on 0, 0.5 or 1 with three sigma
// equal to the interval width measured from the center.
struct GaussianLaw {
  double center;
  double sigma;
  double density(double lambda) const;
};

inline constexpr double kSigmaAmbient = 0.1 / 3.0;
inline constexpr double kSigmaOperational = 0.1 / 3.0;
inline constexpr double kSigmaIntermediate = 0.4 / 3.0;

GaussianLaw mode_law(ThermalMode mode);

// Rejection sampling inside the mode interval (half-Gaussian at the ends).
// `attempts`, when given, accumulates the number of raw draws.
double sample_lambda(ThermalMode mode, Rng& rng, std::size_t* attempts = nullptr);

inline const std::vector<std::string>& known_region_names() {
  static const std::vector<std::string> names = {"engine", "body", "muffler", "windows",
                                                 "running_gear"};
  return names;
}

// Label grid over the texture domain; ids run densely from 1.
struct RegionMap {
  Grid<int> labels;
  std::map<int, std::string> region_names;

  void validate() const;
  static RegionMap load(const std::filesystem::path& label_image,
                        const std::map<int, std::string>& names);
};

struct RegionState {
  ThermalMode mode = ThermalMode::ambient;
  double lambda = 0.0;
};

// Keyed by region name.
using ThermalConfig = std::map<std::string, RegionState>;
using ThermalScenario = std::map<std::string, ThermalMode>;

ThermalScenario builtin_scenario(const std::string& name);
ThermalScenario parse_scenario_json(const std::string& json_text);

// out(p) = (1 - lambda_R) * ta(p) + lambda_R * tf(p) for p in region R.
Image interpolate_texture(const Image& ta, const Image& tf, const RegionMap& regions,
                          const ThermalConfig& config);

ThermalConfig sample_config(const RegionMap& regions, const ThermalScenario& scenario, Rng& rng);

struct Signature {
  Image texture;
  ThermalConfig config;
};

std::vector<Signature> make_signature_set(const Image& ta, const Image& tf,
                                          const RegionMap& regions,
                                          const ThermalScenario& scenario, std::size_t count,
                                          Rng& rng);

}  // namespace atdr
