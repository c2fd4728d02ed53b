#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace atdr {

// Axis-aligned box in center/size form. Pixel i spans [i, i+1), so a box
// covering columns 3..5 has x_center 4.5 and width 3.
class BoundingBox {
 public:
  BoundingBox(double x_center, double y_center, double width, double height);

  static BoundingBox from_edges(double left, double top, double right, double bottom);

  double x_center() const { return x_center_; }
  double y_center() const { return y_center_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double surface() const { return width_ * height_; }

  double left() const { return x_center_ - 0.5 * width_; }
  double right() const { return x_center_ + 0.5 * width_; }
  double top() const { return y_center_ - 0.5 * height_; }
  double bottom() const { return y_center_ + 0.5 * height_; }

  BoundingBox scaled(double factor) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  double x_center_;
  double y_center_;
  double width_;
  double height_;
};

inline double bbox_surface(const BoundingBox& b) { return b.surface(); }

struct ObjectTruth {
  std::int64_t object_id = 0;
  BoundingBox bbox{0, 0, 1, 1};
  std::string recognition_class;
  std::string identification_class;
  double occlusion_fraction = 0.0;
};

struct Detection {
  BoundingBox bbox{0, 0, 1, 1};
  double confidence = 1.0;
  std::optional<std::string> claimed_class;
  std::optional<std::int64_t> tracker_id;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  std::string image_path;
  std::vector<ObjectTruth> truths;
  std::vector<Detection> detections;
};

// Two-level label tree: recognition classes (coarse) own identification
// classes (fine). Insertion order of the source file is preserved.
class ClassTaxonomy {
 public:
  ClassTaxonomy() = default;
  explicit ClassTaxonomy(std::vector<std::pair<std::string, std::vector<std::string>>> classes);

  static ClassTaxonomy parse(const std::string& json_text);
  static ClassTaxonomy load(const std::filesystem::path& path);

  const std::vector<std::string>& recognition_classes() const { return recognition_; }
  const std::vector<std::string>& identification_classes() const { return identification_; }

  bool is_recognition(const std::string& label) const;
  bool is_identification(const std::string& label) const;
  bool contains(const std::string& label) const {
    return is_recognition(label) || is_identification(label);
  }
  // Parent of an identification label; nullopt for unknown labels.
  std::optional<std::string> parent_of(const std::string& identification) const;
  // Projects any known label to the recognition level.
  std::optional<std::string> to_recognition(const std::string& label) const;

  std::string to_json() const;

 private:
  std::vector<std::string> recognition_;
  std::vector<std::string> identification_;
  std::map<std::string, std::string> parent_;
};

// JSON Lines dataset I/O. Image references are resolved relative to the
// dataset file; a missing image yields a warning, never an error.
std::vector<FrameRecord> parse_dataset(std::istream& in, const ClassTaxonomy* taxonomy = nullptr);
std::vector<FrameRecord> load_dataset(const std::filesystem::path& path,
                                      const ClassTaxonomy* taxonomy = nullptr,
                                      std::vector<std::string>* warnings = nullptr);

std::string frame_to_json_line(const FrameRecord& frame);
std::string dataset_to_jsonl(const std::vector<FrameRecord>& frames);
void save_dataset(const std::filesystem::path& path, const std::vector<FrameRecord>& frames);

// Checks the per-frame and per-sequence invariants; throws DataError.
void validate_frames(const std::vector<FrameRecord>& frames, const ClassTaxonomy* taxonomy = nullptr);

}  // namespace atdr
