#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atdr/annotations.hpp"
#include "atdr/detect_eval.hpp"

namespace atdr {

// Shortest round-trip decimal; "inf" / "-inf" / "nan" for non-finite values.
std::string format_number(double v);

// "threshold,far,dr" rows in curve order.
std::string roc_to_csv(const RocCurve& curve);
RocCurve roc_from_csv(const std::string& text);

struct NamedCurve {
  std::string label;
  RocCurve curve;
};

// Staircase DR-vs-FAR plot of one or more curves.
std::string roc_to_svg(const std::vector<NamedCurve>& curves, const std::string& title);

// One row per frame plus a final "total" row.
std::string detection_to_csv(const DetectionReport& report, std::span<const FrameRecord> frames);

// 64-bit FNV-1a of the file bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace atdr
