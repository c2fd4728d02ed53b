#include "atdr/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "atdr/error.hpp"
#include "json.hpp"

namespace atdr {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

std::string at_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

const Json& require(const Json& obj, const char* key, std::size_t line, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(at_line(line, "missing field " + ctx + key));
  return *it;
}

double number_field(const Json& obj, const char* key, std::size_t line, const std::string& ctx) {
  const Json& v = require(obj, key, line, ctx);
  if (!v.is_number()) throw DataError(at_line(line, ctx + key + " must be a number"));
  return v.get<double>();
}

std::int64_t int_field(const Json& obj, const char* key, std::size_t line, const std::string& ctx) {
  const Json& v = require(obj, key, line, ctx);
  if (!v.is_number_integer()) throw DataError(at_line(line, ctx + key + " must be an integer"));
  return v.get<std::int64_t>();
}

std::string string_field(const Json& obj, const char* key, std::size_t line, const std::string& ctx) {
  const Json& v = require(obj, key, line, ctx);
  if (!v.is_string()) throw DataError(at_line(line, ctx + key + " must be a string"));
  return v.get<std::string>();
}

BoundingBox parse_bbox(const Json& obj, std::size_t line, const std::string& ctx) {
  const Json& v = require(obj, "bbox", line, ctx);
  if (!v.is_array() || v.size() != 4) {
    throw DataError(at_line(line, ctx + "bbox must be [xc, yc, w, h]"));
  }
  for (const auto& e : v) {
    if (!e.is_number()) throw DataError(at_line(line, ctx + "bbox entries must be numbers"));
  }
  try {
    return BoundingBox(v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
                       v[3].get<double>());
  } catch (const DataError& e) {
    throw DataError(at_line(line, ctx + "bbox: " + e.what()));
  }
}

FrameRecord parse_frame(const Json& j, std::size_t line) {
  if (!j.is_object()) throw DataError(at_line(line, "frame record must be a JSON object"));
  FrameRecord frame;
  frame.frame_index = int_field(j, "frame", line, "");
  if (frame.frame_index < 0) throw DataError(at_line(line, "frame must be nonnegative"));
  if (auto it = j.find("image"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError(at_line(line, "image must be a string"));
    frame.image_path = it->get<std::string>();
  }

  if (auto it = j.find("truths"); it != j.end()) {
    if (!it->is_array()) throw DataError(at_line(line, "truths must be an array"));
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& t = (*it)[i];
      const std::string ctx = "truths[" + std::to_string(i) + "].";
      if (!t.is_object()) throw DataError(at_line(line, ctx + " must be an object"));
      ObjectTruth truth;
      truth.object_id = int_field(t, "id", line, ctx);
      truth.bbox = parse_bbox(t, line, ctx);
      truth.recognition_class = string_field(t, "rec_class", line, ctx);
      truth.identification_class = string_field(t, "id_class", line, ctx);
      truth.occlusion_fraction = t.contains("occ") ? number_field(t, "occ", line, ctx) : 0.0;
      if (!(truth.occlusion_fraction >= 0.0 && truth.occlusion_fraction <= 1.0)) {
        throw DataError(at_line(line, ctx + "occ must be in [0,1]"));
      }
      frame.truths.push_back(std::move(truth));
    }
  }

  if (auto it = j.find("detections"); it != j.end()) {
    if (!it->is_array()) throw DataError(at_line(line, "detections must be an array"));
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& d = (*it)[i];
      const std::string ctx = "detections[" + std::to_string(i) + "].";
      if (!d.is_object()) throw DataError(at_line(line, ctx + " must be an object"));
      Detection det;
      det.bbox = parse_bbox(d, line, ctx);
      det.confidence = number_field(d, "conf", line, ctx);
      if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
        throw DataError(at_line(line, ctx + "conf must be in [0,1]"));
      }
      if (auto c = d.find("class"); c != d.end() && !c->is_null()) {
        if (!c->is_string()) throw DataError(at_line(line, ctx + "class must be a string or null"));
        det.claimed_class = c->get<std::string>();
      }
      if (auto tr = d.find("track"); tr != d.end() && !tr->is_null()) {
        if (!tr->is_number_integer()) {
          throw DataError(at_line(line, ctx + "track must be an integer or null"));
        }
        det.tracker_id = tr->get<std::int64_t>();
      }
      frame.detections.push_back(std::move(det));
    }
  }
  return frame;
}

void validate_frame(const FrameRecord& frame, const ClassTaxonomy* taxonomy, std::size_t line) {
  std::set<std::int64_t> ids;
  for (std::size_t i = 0; i < frame.truths.size(); ++i) {
    const auto& t = frame.truths[i];
    const std::string ctx = "truths[" + std::to_string(i) + "].";
    if (!ids.insert(t.object_id).second) {
      throw DataError(at_line(line, ctx + "id " + std::to_string(t.object_id) +
                                        " duplicated within frame"));
    }
    if (!(t.occlusion_fraction >= 0.0 && t.occlusion_fraction <= 1.0)) {
      throw DataError(at_line(line, ctx + "occ must be in [0,1]"));
    }
    if (taxonomy != nullptr) {
      auto parent = taxonomy->parent_of(t.identification_class);
      if (!parent) {
        throw DataError(at_line(line, ctx + "id_class '" + t.identification_class +
                                          "' not in taxonomy"));
      }
      if (*parent != t.recognition_class) {
        throw DataError(at_line(line, ctx + "rec_class '" + t.recognition_class +
                                          "' is not the parent of '" +
                                          t.identification_class + "'"));
      }
    }
  }
  std::set<std::int64_t> trackers;
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const auto& d = frame.detections[i];
    const std::string ctx = "detections[" + std::to_string(i) + "].";
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw DataError(at_line(line, ctx + "conf must be in [0,1]"));
    }
    if (d.tracker_id && !trackers.insert(*d.tracker_id).second) {
      throw DataError(at_line(line, ctx + "track " + std::to_string(*d.tracker_id) +
                                        " duplicated within frame"));
    }
    if (taxonomy != nullptr && d.claimed_class && !taxonomy->contains(*d.claimed_class)) {
      throw DataError(at_line(line, ctx + "class '" + *d.claimed_class + "' not in taxonomy"));
    }
  }
}

OrderedJson bbox_json(const BoundingBox& b) {
  return OrderedJson::array({b.x_center(), b.y_center(), b.width(), b.height()});
}

}  // namespace

BoundingBox::BoundingBox(double x_center, double y_center, double width, double height)
    : x_center_(x_center), y_center_(y_center), width_(width), height_(height) {
  if (!std::isfinite(x_center) || !std::isfinite(y_center)) {
    throw DataError("bbox center must be finite");
  }
  if (!(width > 0.0) || !std::isfinite(width)) throw DataError("bbox width must be > 0");
  if (!(height > 0.0) || !std::isfinite(height)) throw DataError("bbox height must be > 0");
}

BoundingBox BoundingBox::from_edges(double left, double top, double right, double bottom) {
  return BoundingBox(0.5 * (left + right), 0.5 * (top + bottom), right - left, bottom - top);
}

BoundingBox BoundingBox::scaled(double factor) const {
  return BoundingBox(x_center_ * factor, y_center_ * factor, width_ * factor, height_ * factor);
}

ClassTaxonomy::ClassTaxonomy(std::vector<std::pair<std::string, std::vector<std::string>>> classes) {
  std::set<std::string> seen_rec;
  for (auto& [rec, ids] : classes) {
    if (rec.empty()) throw DataError("taxonomy: empty recognition class name");
    if (!seen_rec.insert(rec).second) throw DataError("taxonomy: duplicate class '" + rec + "'");
    recognition_.push_back(rec);
  }
  for (auto& [rec, ids] : classes) {
    for (auto& id : ids) {
      if (id.empty()) throw DataError("taxonomy: empty identification class under '" + rec + "'");
      if (seen_rec.count(id) != 0) {
        throw DataError("taxonomy: label '" + id + "' used at both levels");
      }
      if (!parent_.emplace(id, rec).second) {
        throw DataError("taxonomy: identification class '" + id + "' has two parents");
      }
      identification_.push_back(id);
    }
  }
}

ClassTaxonomy ClassTaxonomy::parse(const std::string& json_text) {
  OrderedJson j;
  try {
    j = OrderedJson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("taxonomy: ") + e.what());
  }
  if (!j.is_object() || !j.contains("classes") || !j["classes"].is_object()) {
    throw DataError("taxonomy: expected {\"classes\": {recognition: [identification...]}}");
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> classes;
  for (auto& [rec, ids] : j["classes"].items()) {
    if (!ids.is_array()) throw DataError("taxonomy: class '" + rec + "' must map to an array");
    std::vector<std::string> children;
    for (const auto& id : ids) {
      if (!id.is_string()) throw DataError("taxonomy: labels under '" + rec + "' must be strings");
      children.push_back(id.get<std::string>());
    }
    classes.emplace_back(rec, std::move(children));
  }
  return ClassTaxonomy(std::move(classes));
}

ClassTaxonomy ClassTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open taxonomy " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool ClassTaxonomy::is_recognition(const std::string& label) const {
  return std::find(recognition_.begin(), recognition_.end(), label) != recognition_.end();
}

bool ClassTaxonomy::is_identification(const std::string& label) const {
  return parent_.count(label) != 0;
}

std::optional<std::string> ClassTaxonomy::parent_of(const std::string& identification) const {
  auto it = parent_.find(identification);
  if (it == parent_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ClassTaxonomy::to_recognition(const std::string& label) const {
  if (is_recognition(label)) return label;
  return parent_of(label);
}

std::string ClassTaxonomy::to_json() const {
  OrderedJson classes = OrderedJson::object();
  for (const auto& rec : recognition_) classes[rec] = OrderedJson::array();
  for (const auto& id : identification_) classes[parent_.at(id)].push_back(id);
  return OrderedJson{{"classes", classes}}.dump(2);
}

void validate_frames(const std::vector<FrameRecord>& frames, const ClassTaxonomy* taxonomy) {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].frame_index < 0) {
      throw DataError(at_line(i + 1, "frame must be nonnegative"));
    }
    if (i > 0 && frames[i].frame_index <= frames[i - 1].frame_index) {
      throw DataError("frame_index not increasing at line " + std::to_string(i + 1));
    }
    validate_frame(frames[i], taxonomy, i + 1);
  }
}

std::vector<FrameRecord> parse_dataset(std::istream& in, const ClassTaxonomy* taxonomy) {
  std::vector<FrameRecord> frames;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(at_line(line, std::string("parse error: ") + e.what()));
    }
    FrameRecord frame = parse_frame(j, line);
    if (!frames.empty() && frame.frame_index <= frames.back().frame_index) {
      throw DataError("frame_index not increasing at line " + std::to_string(line));
    }
    validate_frame(frame, taxonomy, line);
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<FrameRecord> load_dataset(const std::filesystem::path& path,
                                      const ClassTaxonomy* taxonomy,
                                      std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  auto frames = parse_dataset(in, taxonomy);
  if (warnings != nullptr) {
    const auto base = path.parent_path();
    for (const auto& f : frames) {
      if (f.image_path.empty()) continue;
      std::error_code ec;
      if (!std::filesystem::exists(base / f.image_path, ec)) {
        warnings->push_back("frame " + std::to_string(f.frame_index) + ": image '" +
                            f.image_path + "' not found");
      }
    }
  }
  return frames;
}

std::string frame_to_json_line(const FrameRecord& frame) {
  OrderedJson j;
  j["frame"] = frame.frame_index;
  j["image"] = frame.image_path;
  OrderedJson truths = OrderedJson::array();
  for (const auto& t : frame.truths) {
    OrderedJson o;
    o["id"] = t.object_id;
    o["bbox"] = bbox_json(t.bbox);
    o["rec_class"] = t.recognition_class;
    o["id_class"] = t.identification_class;
    o["occ"] = t.occlusion_fraction;
    truths.push_back(std::move(o));
  }
  j["truths"] = std::move(truths);
  OrderedJson dets = OrderedJson::array();
  for (const auto& d : frame.detections) {
    OrderedJson o;
    o["bbox"] = bbox_json(d.bbox);
    o["conf"] = d.confidence;
    o["class"] = d.claimed_class ? OrderedJson(*d.claimed_class) : OrderedJson(nullptr);
    o["track"] = d.tracker_id ? OrderedJson(*d.tracker_id) : OrderedJson(nullptr);
    dets.push_back(std::move(o));
  }
  j["detections"] = std::move(dets);
  return j.dump();
}

std::string dataset_to_jsonl(const std::vector<FrameRecord>& frames) {
  std::string out;
  for (const auto& f : frames) {
    out += frame_to_json_line(f);
    out += '\n';
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const std::vector<FrameRecord>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset " + path.string());
  out << dataset_to_jsonl(frames);
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace atdr
