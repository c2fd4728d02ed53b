#include "atdr/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "atdr/error.hpp"

namespace atdr {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string roc_to_csv(const RocCurve& curve) {
  std::ostringstream out;
  out << "threshold,far,dr\n";
  for (const auto& p : curve.points) {
    out << format_number(p.threshold) << ',' << format_number(p.far) << ',' << format_number(p.dr)
        << '\n';
  }
  return out.str();
}

RocCurve roc_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("threshold,far,dr", 0) != 0) {
    throw DataError("ROC CSV must start with the header threshold,far,dr");
  }
  RocCurve curve;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string cell[3];
    for (auto& c : cell) {
      if (!std::getline(row, c, ',')) {
        throw DataError("ROC CSV line " + std::to_string(line_no) + ": expected 3 columns");
      }
    }
    try {
      curve.points.push_back({std::stod(cell[0]), std::stod(cell[1]), std::stod(cell[2])});
    } catch (const std::exception&) {
      throw DataError("ROC CSV line " + std::to_string(line_no) + ": bad number");
    }
  }
  return curve;
}

namespace {

double nice_ceiling(double v) {
  if (!(v > 0.0)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (double step : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (step * mag >= v) return step * mag;
  }
  return 10.0 * mag;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string roc_to_svg(const std::vector<NamedCurve>& curves, const std::string& title) {
  constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;
  double far_max = 0.0;
  for (const auto& c : curves) {
    for (const auto& p : c.curve.points) far_max = std::max(far_max, p.far);
  }
  far_max = nice_ceiling(far_max);
  auto px = [&](double far) { return kLeft + plot_w * far / far_max; };
  auto py = [&](double dr) { return kTop + plot_h * (1.0 - dr); };

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double f = i / 5.0;
    s << "<line x1=\"" << px(f * far_max) << "\" y1=\"" << kTop << "\" x2=\"" << px(f * far_max)
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"#ddd\"/>\n";
    s << "<line x1=\"" << kLeft << "\" y1=\"" << py(f) << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << py(f) << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << px(f * far_max) << "\" y=\"" << kTop + plot_h + 16
      << "\" text-anchor=\"middle\">" << format_number(f * far_max) << "</text>\n";
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(f) + 4 << "\" text-anchor=\"end\">"
      << format_number(f) << "</text>\n";
  }
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
    << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 18
    << "\" text-anchor=\"middle\">false alarms per frame</text>\n";
  s << "<text transform=\"translate(18," << kTop + plot_h / 2
    << ") rotate(-90)\" text-anchor=\"middle\">detection rate</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    double far = 0.0;
    double dr = 0.0;
    s << px(far) << ',' << py(dr);
    for (const auto& p : curves[i].curve.points) {
      s << ' ' << px(p.far) << ',' << py(dr) << ' ' << px(p.far) << ',' << py(p.dr);
      far = p.far;
      dr = p.dr;
    }
    s << "\"/>\n";
    const double ly = kTop + 16 + 18.0 * static_cast<double>(i);
    s << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
      << kLeft + plot_w - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << kLeft + plot_w - 120 << "\" y=\"" << ly + 4 << "\">"
      << xml_escape(curves[i].label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string detection_to_csv(const DetectionReport& report, std::span<const FrameRecord> frames) {
  std::ostringstream out;
  out << "frame,truths,detections,tp,fa,missed,mt,mo\n";
  std::size_t det_total = 0;
  for (std::size_t i = 0; i < report.per_frame.size(); ++i) {
    const auto& s = report.per_frame[i];
    const std::size_t dets = i < frames.size() ? frames[i].detections.size() : 0;
    det_total += dets;
    out << (i < frames.size() ? frames[i].frame_index : static_cast<std::int64_t>(i)) << ','
        << (i < frames.size() ? frames[i].truths.size() : 0) << ',' << dets << ','
        << s.true_positives << ',' << s.false_alarms << ',' << s.missed << ',' << s.mt_count << ','
        << s.mo_count << '\n';
  }
  const auto& t = report.totals;
  out << "total," << report.truth_count << ',' << det_total << ',' << t.true_positives << ','
      << t.false_alarms << ',' << t.missed << ',' << t.mt_count << ',' << t.mo_count << '\n';
  return out.str();
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace atdr
