#include "atdr/classify_eval.hpp"

#include <algorithm>
#include <sstream>

#include "atdr/error.hpp"
#include "json.hpp"

namespace atdr {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (std::find(labels_.begin(), labels_.end(), kUnclassified) == labels_.end()) {
    labels_.emplace_back(kUnclassified);
  }
  counts_.assign(labels_.size() * labels_.size(), 0);
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw DataError("label '" + label + "' not in confusion matrix");
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < labels_.size(); ++p) s += count(truth, p);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) s += count(i, i);
  return s;
}

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& l : labels_) out << ',' << l;
  out << '\n';
  for (std::size_t t = 0; t < labels_.size(); ++t) {
    out << labels_[t];
    for (std::size_t p = 0; p < labels_.size(); ++p) out << ',' << count(t, p);
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix confusion(std::span<const FrameRecord> frames, const MatchCriterion& criterion,
                          ClassLevel level, const ClassTaxonomy& taxonomy) {
  const bool coarse = level == ClassLevel::recognition;
  ConfusionMatrix m(coarse ? taxonomy.recognition_classes() : taxonomy.identification_classes());
  const std::size_t unclassified = m.index_of(kUnclassified);

  for (const auto& frame : frames) {
    const auto where = " in frame " + std::to_string(frame.frame_index);
    const auto match = match_frame(frame.truths, frame.detections, criterion);
    for (auto [t, d] : match.pairs) {
      const auto& truth = frame.truths[t];
      const std::string& truth_label =
          coarse ? truth.recognition_class : truth.identification_class;
      const bool known = coarse ? taxonomy.is_recognition(truth_label)
                                : taxonomy.is_identification(truth_label);
      if (!known) throw DataError("unknown label '" + truth_label + "'" + where);

      std::size_t predicted = unclassified;
      if (const auto& claim = frame.detections[d].claimed_class) {
        if (!taxonomy.contains(*claim)) throw DataError("unknown label '" + *claim + "'" + where);
        if (coarse) {
          predicted = m.index_of(*taxonomy.to_recognition(*claim));
        } else if (taxonomy.is_identification(*claim)) {
          predicted = m.index_of(*claim);
        }
      }
      m.add(m.index_of(truth_label), predicted);
    }
  }
  return m;
}

ConfusionMatrix aggregate_to_recognition(const ConfusionMatrix& identification,
                                         const ClassTaxonomy& taxonomy) {
  ConfusionMatrix out(taxonomy.recognition_classes());
  auto project = [&](const std::string& label) {
    if (label == kUnclassified) return out.index_of(kUnclassified);
    return out.index_of(taxonomy.parent_of(label).value());
  };
  const auto& labels = identification.labels();
  for (std::size_t t = 0; t < labels.size(); ++t) {
    for (std::size_t p = 0; p < labels.size(); ++p) {
      if (auto n = identification.count(t, p); n != 0) out.add(project(labels[t]), project(labels[p]), n);
    }
  }
  return out;
}

ClassificationRates classification_rates(const ConfusionMatrix& m) {
  ClassificationRates r;
  r.labels = m.labels();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto row = m.row_sum(i);
    if (row == 0) {
      r.per_class.emplace_back(std::nullopt);
    } else {
      r.per_class.emplace_back(static_cast<double>(m.count(i, i)) / static_cast<double>(row));
    }
  }
  if (m.total() != 0) {
    r.overall = static_cast<double>(m.trace()) / static_cast<double>(m.total());
  }
  return r;
}

std::string ClassificationRates::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    per[labels[i]] = per_class[i] ? nlohmann::ordered_json(*per_class[i]) : nullptr;
  }
  j["per_class"] = std::move(per);
  j["overall"] = overall ? nlohmann::ordered_json(*overall) : nullptr;
  return j.dump(2);
}

}  // namespace atdr
