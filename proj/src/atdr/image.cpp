#include "atdr/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "atdr/error.hpp"

namespace atdr {

namespace {

bool has_png_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

// PGM header tokens may be separated by whitespace and '#' comments.
int read_pgm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else {
      break;
    }
    c = in.peek();
  }
  int value = -1;
  if (!(in >> value)) throw DataError("malformed PGM header");
  return value;
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2')) {
    throw DataError("not a PGM file: " + path.string());
  }
  const int width = read_pgm_int(in);
  const int height = read_pgm_int(in);
  const int maxval = read_pgm_int(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw DataError("invalid PGM dimensions in " + path.string());
  }
  Image image(width, height);
  if (magic[1] == '2') {
    for (std::size_t i = 0; i < image.size(); ++i) {
      int v = 0;
      if (!(in >> v)) throw DataError("truncated PGM data in " + path.string());
      image[i] = v;
    }
    return image;
  }
  in.get();  // single whitespace before raster
  const bool wide = maxval > 255;
  std::vector<unsigned char> raw(image.size() * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw DataError("truncated PGM data in " + path.string());
  }
  for (std::size_t i = 0; i < image.size(); ++i) {
    image[i] = wide ? static_cast<double>((raw[2 * i] << 8) | raw[2 * i + 1]) : raw[i];
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const Image& image, bool wide) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << '\n' << (wide ? 65535 : 255) << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(image.size() * (wide ? 2 : 1));
  for (double v : image.pixels()) {
    const auto q = static_cast<unsigned>(std::clamp(std::lround(v), 0L, wide ? 65535L : 255L));
    if (wide) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xff));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open image " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialisation failed");
  }
  Image image;
  std::vector<png_byte> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // little-endian host order below
  png_read_update_info(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const auto stride = png_get_rowbytes(png, info);
  rows.resize(stride * height);
  std::vector<png_bytep> row_ptrs(height);
  for (png_uint_32 y = 0; y < height; ++y) row_ptrs[y] = rows.data() + y * stride;
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  image = Image(static_cast<int>(width), static_cast<int>(height));
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      const png_byte* p = row_ptrs[y];
      image.at(static_cast<int>(x), static_cast<int>(y)) =
          out_depth == 16 ? static_cast<double>(p[2 * x] | (p[2 * x + 1] << 8)) : p[x];
    }
  }
  return image;
}

void write_png(const std::filesystem::path& path, const Image& image, bool wide) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot write image " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialisation failed");
  }
  const int bytes = wide ? 2 : 1;
  std::vector<png_byte> raw(image.size() * static_cast<std::size_t>(bytes));
  for (std::size_t i = 0; i < image.size(); ++i) {
    const auto q = static_cast<unsigned>(
        std::clamp(std::lround(image[i]), 0L, wide ? 65535L : 255L));
    if (wide) {
      raw[2 * i] = static_cast<png_byte>(q >> 8);
      raw[2 * i + 1] = static_cast<png_byte>(q & 0xff);
    } else {
      raw[i] = static_cast<png_byte>(q);
    }
  }
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    row_ptrs[static_cast<std::size_t>(y)] =
        raw.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width()) *
                         static_cast<std::size_t>(bytes);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encoding failed: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), wide ? 16 : 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

std::size_t count_set(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](auto v) { return v != 0; }));
}

std::optional<PixelRect> mask_bounds(const Mask& mask) {
  PixelRect r{mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y) == 0) continue;
      r.x0 = std::min(r.x0, x);
      r.y0 = std::min(r.y0, y);
      r.x1 = std::max(r.x1, x + 1);
      r.y1 = std::max(r.y1, y + 1);
    }
  }
  if (r.x1 < 0) return std::nullopt;
  return r;
}

Image resample_bilinear(const Image& src, int out_width, int out_height) {
  if (src.empty() || out_width <= 0 || out_height <= 0) {
    throw DataError("resample: empty source or target size");
  }
  Image out(out_width, out_height);
  const double sx = static_cast<double>(src.width()) / out_width;
  const double sy = static_cast<double>(src.height()) / out_height;
  for (int y = 0; y < out_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < out_width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double tx = fx - x0;
      const double top = (1 - tx) * src.at(x0, y0) + tx * src.at(x1, y0);
      const double bottom = (1 - tx) * src.at(x0, y1) + tx * src.at(x1, y1);
      out.at(x, y) = (1 - ty) * top + ty * bottom;
    }
  }
  return out;
}

Mask threshold(const Image& values, double level) {
  Mask out(values.width(), values.height());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] >= level ? 1 : 0;
  return out;
}

Image to_image(const Mask& mask) {
  Image out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] != 0 ? 1.0 : 0.0;
  return out;
}

Image quantize(const Image& image) {
  Image out = image;
  for (double& v : out.pixels()) v = std::clamp(std::round(v), 0.0, kGrayMax);
  return out;
}

Image read_image(const std::filesystem::path& path) {
  return has_png_extension(path) ? read_png(path) : read_pgm(path);
}

void write_image(const std::filesystem::path& path, const Image& image) {
  if (has_png_extension(path)) {
    write_png(path, image, true);
  } else {
    write_pgm(path, image, true);
  }
}

void write_image8(const std::filesystem::path& path, const Image& image) {
  if (has_png_extension(path)) {
    write_png(path, image, false);
  } else {
    write_pgm(path, image, false);
  }
}

Mask read_mask(const std::filesystem::path& path) {
  const Image img = read_image(path);
  Mask mask(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img[i] > 0 ? 1 : 0;
  return mask;
}

}  // namespace atdr
