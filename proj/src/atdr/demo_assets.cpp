#include "atdr/demo_assets.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "atdr/error.hpp"
#include "atdr/reports.hpp"
#include "atdr/sensor_model.hpp"
#include "json.hpp"

namespace atdr {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr double kBaseLevel = 30000.0;
constexpr double kPixelsPerMeter = 10.0;

Image white_noise(int w, int h, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Image img(w, h);
  for (auto& v : img.pixels()) v = n(rng);
  return img;
}

void normalize_std(Image& img, double target_std) {
  double mean = 0.0;
  for (double v : img.pixels()) mean += v;
  mean /= static_cast<double>(img.size());
  double var = 0.0;
  for (double v : img.pixels()) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(img.size()));
  for (auto& v : img.pixels()) v = sd > 0.0 ? (v - mean) / sd * target_std : 0.0;
}

// Smooth random texture with unit-scaled detail at two correlation lengths.
Image clutter(int w, int h, double coarse, double fine, Rng& rng) {
  Image a = blur(white_noise(w, h, rng), coarse);
  Image b = blur(white_noise(w, h, rng), fine);
  normalize_std(a, 0.8);
  normalize_std(b, 0.6);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  normalize_std(a, 1.0);
  return a;
}

void fill_rect(Mask& m, double x0, double y0, double x1, double y1) {
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const double cx = x + 0.5;
      const double cy = y + 0.5;
      if (cx >= x0 && cx < x1 && cy >= y0 && cy < y1) m.at(x, y) = 1;
    }
  }
}

Sprite finish_sprite(Mask mask, Image intensity, double physical_height, std::string rec,
                     std::string id) {
  const auto b = mask_bounds(mask);
  if (!b) throw DataError("demo sprite has an empty mask");
  Sprite s;
  s.mask = crop(mask, *b);
  s.intensity = crop(intensity, *b);
  for (std::size_t i = 0; i < s.mask.size(); ++i) {
    if (!s.mask[i]) s.intensity[i] = kBaseLevel;
  }
  s.physical_height = physical_height;
  s.recognition_class = std::move(rec);
  s.identification_class = std::move(id);
  return s;
}

fs::path write_sprite(const fs::path& dir, const std::string& stem, const Sprite& s) {
  write_image(dir / (stem + ".pgm"), s.intensity);
  Image m = to_image(s.mask);
  for (auto& v : m.pixels()) v *= 255.0;
  write_image8(dir / (stem + "_mask.pgm"), m);
  return dir / (stem + ".pgm");
}

}  // namespace

Image demo_background(int width, int height, double clutter_std, Rng& rng) {
  Image img = clutter(width, height, 10.0, 2.0, rng);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      // Warmer ground toward the bottom of the frame.
      const double ramp = 0.6 * (static_cast<double>(y) / height - 0.5);
      img.at(x, y) = kBaseLevel + clutter_std * (img.at(x, y) + ramp);
    }
  }
  return img;
}

Sprite demo_vehicle(DemoVehicle kind, Rng& rng) {
  int w = 48;
  int h = 24;
  Mask mask(w, h);
  std::string rec, id;
  double height_m = 2.4;
  switch (kind) {
    case DemoVehicle::tank:
      fill_rect(mask, 2, 12, 46, 21);   // hull
      fill_rect(mask, 4, 21, 44, 24);   // running gear
      fill_rect(mask, 14, 6, 32, 12);   // turret
      fill_rect(mask, 32, 8, 47, 10);   // gun
      rec = "tank";
      id = "AMX30";
      break;
    case DemoVehicle::truck:
      fill_rect(mask, 2, 4, 34, 20);    // box
      fill_rect(mask, 34, 9, 46, 20);   // cab
      fill_rect(mask, 4, 20, 12, 24);   // wheels
      fill_rect(mask, 26, 20, 34, 24);
      fill_rect(mask, 37, 20, 44, 24);
      rec = "truck";
      id = "GBC180";
      height_m = 3.0;
      break;
    case DemoVehicle::car:
      fill_rect(mask, 4, 12, 44, 20);
      fill_rect(mask, 14, 6, 34, 12);
      fill_rect(mask, 8, 20, 14, 24);
      fill_rect(mask, 34, 20, 40, 24);
      rec = "car";
      id = "P4";
      height_m = 1.9;
      break;
  }
  Image tex = clutter(w, h, 3.0, 1.0, rng);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Engine heat at the rear (left), cooler front.
      const double heat = 1.5 * std::exp(-std::pow((x - 8.0) / 8.0, 2.0));
      tex.at(x, y) = kBaseLevel + 200.0 * (tex.at(x, y) + heat);
    }
  }
  return finish_sprite(std::move(mask), std::move(tex), height_m, rec, id);
}

Sprite demo_occultant(int width, int height, Rng& rng) {
  Mask mask(width, height);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double p1 = phase(rng);
  const double p2 = phase(rng);
  const double cx = 0.5 * width;
  const double cy = 0.5 * height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = (x + 0.5 - cx) / (0.5 * width);
      const double dy = (y + 0.5 - cy) / (0.5 * height);
      const double a = std::atan2(dy, dx);
      const double r = 0.92 + 0.05 * std::sin(5.0 * a + p1) + 0.03 * std::sin(9.0 * a + p2);
      if (dx * dx + dy * dy <= r * r) mask.at(x, y) = 1;
    }
  }
  Image tex = clutter(width, height, 2.0, 1.0, rng);
  for (auto& v : tex.pixels()) v = kBaseLevel - 150.0 + 120.0 * v;
  Sprite s = finish_sprite(std::move(mask), std::move(tex), 2.0, "vegetation", "bush");
  return s;
}

Sprite demo_view(double aspect, Rng& rng) {
  constexpr double kLength = 6.5;
  constexpr double kWidth = 3.4;
  constexpr double kHeight = 2.4;
  const double a = aspect * std::numbers::pi / 180.0;
  const double end_w = kWidth * std::abs(std::cos(a)) * kPixelsPerMeter;
  const double side_w = kLength * std::abs(std::sin(a)) * kPixelsPerMeter;
  const int w = static_cast<int>(std::ceil(end_w + side_w)) + 2;
  const int h = static_cast<int>(std::ceil(kHeight * kPixelsPerMeter)) + 1;
  const bool front = std::cos(a) >= 0.0;
  // The end face sits on the side the vehicle is turned toward.
  const bool end_on_left = std::sin(a) >= 0.0;
  const double end_x0 = end_on_left ? 1.0 : 1.0 + side_w;
  const double end_x1 = end_x0 + end_w;
  const double hull_top = 0.45 * h;

  Mask mask(w, h);
  fill_rect(mask, 1.0, hull_top, 1.0 + end_w + side_w, h);
  const double turret_w = 0.45 * (end_w + side_w);
  const double turret_x0 = 1.0 + 0.5 * (end_w + side_w - turret_w);
  fill_rect(mask, turret_x0, 0.0, turret_x0 + turret_w, hull_top);

  Image tex = clutter(w, h, 2.0, 1.0, rng);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double cx = x + 0.5;
      double level = 1.0;  // side face
      if (cx >= end_x0 && cx < end_x1) level = front ? 0.4 : 3.0;  // rear carries the engine
      if (y + 0.5 >= h - 0.2 * h) level += 0.8;                       // running gear friction
      tex.at(x, y) = kBaseLevel + 150.0 * (tex.at(x, y) + level);
    }
  }
  Sprite s = finish_sprite(std::move(mask), std::move(tex), kHeight, "tank", "AMX30");
  s.native_aspect = aspect;
  return s;
}

DemoThermal demo_thermal(Rng& rng) {
  const Sprite shape = demo_vehicle(DemoVehicle::tank, rng);
  const int w = shape.mask.width();
  const int h = shape.mask.height();
  DemoThermal t;
  t.mask = shape.mask;
  t.regions.region_names = {{1, "engine"}, {2, "body"}, {3, "muffler"}, {4, "windows"},
                            {5, "running_gear"}};
  t.regions.labels = Grid<int>(w, h, 2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int label = 2;
      if (x < w / 4 && y >= h / 3) label = 1;
      if (x < w / 4 && y < h / 3) label = 3;
      if (x >= w / 3 && x < 2 * w / 3 && y < h / 3) label = 4;
      if (y >= h - 4) label = 5;
      t.regions.labels.at(x, y) = label;
    }
  }
  const Image grain = clutter(w, h, 2.0, 1.0, rng);
  t.ta = Image(w, h);
  t.tf = Image(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double g = 60.0 * grain.at(x, y);
      t.ta.at(x, y) = kBaseLevel + g;
      double hot = 300.0;  // operating body warms a little
      switch (t.regions.labels.at(x, y)) {
        case 1: hot = 1500.0; break;
        case 3: hot = 2200.0; break;
        case 4: hot = 150.0; break;
        case 5: hot = 900.0; break;
        default: break;
      }
      t.tf.at(x, y) = kBaseLevel + g + hot;
    }
  }
  t.regions.validate();
  return t;
}

DemoAssetPaths make_demo_assets(const fs::path& out_dir, std::uint64_t seed, int background_size) {
  if (background_size < 64) throw UsageError("background size must be at least 64");
  fs::create_directories(out_dir / "library");
  DemoAssetPaths paths;

  ordered_json manifest;
  ordered_json backgrounds;
  const std::pair<const char*, double> bg_specs[] = {{"field", 120.0}, {"forest", 400.0}};
  std::uint64_t stream = 0;
  for (const auto& [name, clutter_std] : bg_specs) {
    Rng rng = make_rng(seed, ++stream);
    write_image(out_dir / (std::string(name) + ".pgm"),
                demo_background(background_size, background_size, clutter_std, rng));
    backgrounds[name] = {{"image", std::string(name) + ".pgm"}};
  }
  manifest["backgrounds"] = backgrounds;

  ordered_json sprites;
  const std::pair<const char*, DemoVehicle> vehicles[] = {
      {"tank", DemoVehicle::tank}, {"truck", DemoVehicle::truck}, {"car", DemoVehicle::car}};
  for (const auto& [name, kind] : vehicles) {
    Rng rng = make_rng(seed, ++stream);
    const Sprite s = demo_vehicle(kind, rng);
    write_sprite(out_dir, name, s);
    sprites[name] = {{"image", std::string(name) + ".pgm"},
                     {"mask", std::string(name) + "_mask.pgm"},
                     {"physical_height", s.physical_height},
                     {"native_aspect", 90.0},
                     {"rec_class", s.recognition_class},
                     {"id_class", s.identification_class}};
  }
  {
    Rng rng = make_rng(seed, ++stream);
    const Sprite bush = demo_occultant(56, 40, rng);
    write_sprite(out_dir, "bush", bush);
    sprites["bush"] = {{"image", "bush.pgm"},
                       {"mask", "bush_mask.pgm"},
                       {"physical_height", bush.physical_height},
                       {"native_aspect", 0.0},
                       {"rec_class", ""},
                       {"id_class", ""}};
  }
  manifest["sprites"] = sprites;

  {
    Rng rng = make_rng(seed, ++stream);
    const DemoThermal t = demo_thermal(rng);
    write_image(out_dir / "tank_ta.pgm", t.ta);
    write_image(out_dir / "tank_tf.pgm", t.tf);
    Image labels(t.regions.labels.width(), t.regions.labels.height());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = t.regions.labels[i];
    write_image8(out_dir / "tank_regions.pgm", labels);
    Image m = to_image(t.mask);
    for (auto& v : m.pixels()) v *= 255.0;
    write_image8(out_dir / "tank_thermal_mask.pgm", m);
    ordered_json names;
    for (const auto& [id, name] : t.regions.region_names) names[std::to_string(id)] = name;
    manifest["thermal"] = {{"tank_thermal",
                            {{"ta", "tank_ta.pgm"},
                             {"tf", "tank_tf.pgm"},
                             {"regions", "tank_regions.pgm"},
                             {"region_names", names},
                             {"mask", "tank_thermal_mask.pgm"},
                             {"physical_height", 2.4},
                             {"native_aspect", 90.0},
                             {"rec_class", "tank"},
                             {"id_class", "AMX30"}}}};
  }

  ordered_json entries = ordered_json::array();
  for (int a = 0; a < 360; a += 10) {
    Rng rng = make_rng(seed, 1000 + static_cast<std::uint64_t>(a));
    const Sprite view = demo_view(a, rng);
    const std::string stem = "view_" + std::to_string(a);
    write_sprite(out_dir / "library", stem, view);
    entries.push_back({{"aspect", a},
                       {"signature", "default"},
                       {"image", stem + ".pgm"},
                       {"mask", stem + "_mask.pgm"},
                       {"physical_height", view.physical_height},
                       {"rec_class", "tank"},
                       {"id_class", "AMX30"}});
  }
  paths.library = out_dir / "library" / "library.json";
  write_text(paths.library, ordered_json{{"bucket_width", 10.0}, {"entries", entries}}.dump(2));
  manifest["sprite_library"] = "library/library.json";

  paths.manifest = out_dir / "manifest.json";
  write_text(paths.manifest, manifest.dump(2));

  paths.taxonomy = out_dir / "taxonomy.json";
  write_text(paths.taxonomy,
             ordered_json{{"classes",
                           {{"tank", {"AMX30", "Leclerc", "T72"}},
                            {"truck", {"GBC180"}},
                            {"car", {"P4"}}}}}
                 .dump(2));

  // Example recipes: three difficulty scenarios on the two backgrounds.
  const double c = 0.5 * background_size;
  ordered_json recipes = ordered_json::array();
  const struct {
    const char* scenario;
    double scr;
    double r_x;
  } levels[] = {{"easy", 4.0, 0.0}, {"medium", 2.0, 0.2}, {"hard", 1.0, 0.4}};
  const char* targets[] = {"tank", "truck", "car", "tank_thermal"};
  int n = 0;
  for (const auto& lv : levels) {
    for (int i = 0; i < 4; ++i, ++n) {
      ordered_json r = {{"scenario", lv.scenario},
                        {"rss", 2.0},
                        {"q_d", 1400.0},
                        {"scr", lv.scr},
                        {"r_x", lv.r_x},
                        {"k", (3.0 - 2.0 * i) / 10.0},
                        {"background_id", i % 2 == 0 ? "field" : "forest"},
                        {"target_sprite_id", targets[i]},
                        {"occultant_sprite_id", "bush"},
                        {"target_position", {c + 8.0 * (i - 1.5), c + 4.0 * (i - 1.5)}},
                        {"sensor", {{"mtf_sigma", 1.0}, {"sampling_factor", 1}, {"netd_kelvin", 0.05}}}};
      if (std::string(targets[i]) == "tank_thermal") r["thermal_scenario"] = "standby";
      recipes.push_back(r);
    }
  }
  paths.recipes = out_dir / "recipes.json";
  write_text(paths.recipes, recipes.dump(2));

  // Approaching S path seen from about 300 m.
  ordered_json seq = {
      {"trajectory",
       {{"kind", "S"}, {"start", {320.0, 0.0}}, {"end", {260.0, 0.0}}, {"s_amplitude", 8.0},
        {"s_periods", 2}, {"speed", 20.0}, {"frame_rate", 25.0}}},
      {"geometry", {{"position", {0.0, 0.0, 3.0}}, {"focal_scale", 3000.0}}},
      {"recipe",
       {{"rss", 2.0}, {"scr", 3.0}, {"k", 0.0}, {"r_x", 0.0}, {"background_id", "field"},
        {"occultant_sprite_id", ""}}},
      {"sensor", {{"mtf_sigma", 0.8}, {"sampling_factor", 1}, {"netd_kelvin", 0.05}}},
      {"signature", "default"},
      {"assets", "manifest.json"},
      {"sprite_library", "library/library.json"}};
  paths.sequence_job = out_dir / "sequence.json";
  write_text(paths.sequence_job, seq.dump(2));
  return paths;
}

}  // namespace atdr
