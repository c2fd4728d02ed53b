#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "atdr/annotations.hpp"
#include "atdr/image.hpp"

namespace atdr {

// Step D of scene generation: Gaussian MTF, decimation, additive white
// Gaussian noise, in that order.
struct SensorConfig {
  double mtf_sigma = 1.0;  // pixels
  int sampling_factor = 1;
  double noise_sigma = 5.0;  // gray levels; 50 mK NETD at 100 gray levels per K
  std::uint64_t seed = 0;
  std::optional<Image> kernel;  // replaces the Gaussian when present

  static SensorConfig identity() { return {0.0, 1, 0.0, 0, std::nullopt}; }
  static double noise_from_netd(double netd_kelvin, double nu_k) { return netd_kelvin * nu_k; }

  void validate() const;
};

struct SensorGeometryChange {
  double scale = 1.0;  // multiply pixel coordinates by this to map into the output
  BoundingBox apply(const BoundingBox& b) const { return b.scaled(scale); }
};

struct SensorOutput {
  Image image;
  SensorGeometryChange geometry;
};

// 1-D Gaussian truncated at 4 sigma and renormalized; {1} for sigma == 0.
std::vector<double> gaussian_kernel(double sigma);

// Plain-text kernel: whitespace-separated rows of numbers, normalized to sum 1.
Image load_kernel(const std::filesystem::path& path);

// Convolution with half-sample symmetric boundary extension, which keeps the
// operator doubly stochastic (mean-preserving).
Image blur(const Image& image, double sigma);
Image convolve(const Image& image, const Image& kernel);
Image decimate(const Image& image, int factor);

SensorOutput apply_sensor(const Image& image, const SensorConfig& cfg);

}  // namespace atdr
