#include "atdr/sensor_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "atdr/error.hpp"
#include "atdr/rng.hpp"

namespace atdr {

namespace {

// Half-sample symmetric reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

Image convolve_rows(const Image& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  Image out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) acc += k[static_cast<std::size_t>(j + r)] * in.at(reflect(x + j, in.width()), y);
      out.at(x, y) = acc;
    }
  }
  return out;
}

Image convolve_cols(const Image& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  Image out(in.width(), in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      double acc = 0.0;
      for (int j = -r; j <= r; ++j) acc += k[static_cast<std::size_t>(j + r)] * in.at(x, reflect(y + j, in.height()));
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace

void SensorConfig::validate() const {
  if (!(mtf_sigma >= 0.0) || !std::isfinite(mtf_sigma)) throw DataError("sensor: mtf_sigma must be >= 0");
  if (sampling_factor < 1) throw DataError("sensor: sampling_factor must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw DataError("sensor: noise_sigma must be >= 0");
  if (kernel && (kernel->width() % 2 == 0 || kernel->height() % 2 == 0)) {
    throw DataError("sensor: kernel dimensions must be odd");
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

Image load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open kernel file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw DataError("kernel file: non-numeric entry in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("kernel file is empty: " + path.string());
  const std::size_t w = rows.front().size();
  Image k(static_cast<int>(w), static_cast<int>(rows.size()));
  double sum = 0.0;
  for (std::size_t y = 0; y < rows.size(); ++y) {
    if (rows[y].size() != w) throw DataError("kernel file: ragged rows in " + path.string());
    for (std::size_t x = 0; x < w; ++x) {
      k.at(static_cast<int>(x), static_cast<int>(y)) = rows[y][x];
      sum += rows[y][x];
    }
  }
  if (k.width() % 2 == 0 || k.height() % 2 == 0) throw DataError("kernel dimensions must be odd");
  if (!(sum > 0.0)) throw DataError("kernel must have a positive sum");
  for (double& v : k.pixels()) v /= sum;
  return k;
}

Image blur(const Image& image, double sigma) {
  if (sigma <= 0.0) return image;
  const auto k = gaussian_kernel(sigma);
  return convolve_cols(convolve_rows(image, k), k);
}

Image convolve(const Image& image, const Image& kernel) {
  const int rx = kernel.width() / 2;
  const int ry = kernel.height() / 2;
  Image out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      double acc = 0.0;
      for (int j = -ry; j <= ry; ++j) {
        const int sy = reflect(y + j, image.height());
        for (int i = -rx; i <= rx; ++i) {
          acc += kernel.at(i + rx, j + ry) * image.at(reflect(x + i, image.width()), sy);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Image decimate(const Image& image, int factor) {
  if (factor <= 1) return image;
  const int w = image.width() / factor;
  const int h = image.height() / factor;
  if (w == 0 || h == 0) throw DataError("sensor: image smaller than sampling factor");
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = image.at(x * factor, y * factor);
  return out;
}

SensorOutput apply_sensor(const Image& image, const SensorConfig& cfg) {
  cfg.validate();
  if (image.empty()) throw DataError("sensor: empty image");
  SensorOutput out;
  out.image = cfg.kernel ? convolve(image, *cfg.kernel) : blur(image, cfg.mtf_sigma);
  out.image = decimate(out.image, cfg.sampling_factor);
  out.geometry.scale = 1.0 / cfg.sampling_factor;
  if (cfg.noise_sigma > 0.0) {
    Rng rng = make_rng(cfg.seed, 0x5e5);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (double& v : out.image.pixels()) v += noise(rng);
  }
  for (double& v : out.image.pixels()) v = std::clamp(v, 0.0, kGrayMax);
  return out;
}

}  // namespace atdr
