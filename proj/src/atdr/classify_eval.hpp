#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atdr/annotations.hpp"
#include "atdr/detect_eval.hpp"

namespace atdr {

enum class ClassLevel { recognition, identification };

inline constexpr const char* kUnclassified = "unclassified";

// Square count grid indexed [true][predicted]. The last label is always
// "unclassified" and collects matched detections without a usable label.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t index_of(const std::string& label) const;

  std::size_t count(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * labels_.size() + predicted];
  }
  std::size_t count(const std::string& truth, const std::string& predicted) const {
    return count(index_of(truth), index_of(predicted));
  }
  void add(std::size_t truth, std::size_t predicted, std::size_t n = 1) {
    counts_[truth * labels_.size() + predicted] += n;
  }

  std::size_t row_sum(std::size_t truth) const;
  std::size_t total() const;
  std::size_t trace() const;

  std::string to_csv() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> counts_;
};

// Scores the class claimed by every true-positive detection. At the
// recognition level identification labels are projected through the
// taxonomy; at the identification level a coarse-only claim cannot be
// compared and lands in "unclassified".
ConfusionMatrix confusion(std::span<const FrameRecord> frames, const MatchCriterion& criterion,
                          ClassLevel level, const ClassTaxonomy& taxonomy);

// Collapses an identification-level matrix to the recognition level.
ConfusionMatrix aggregate_to_recognition(const ConfusionMatrix& identification,
                                         const ClassTaxonomy& taxonomy);

struct ClassificationRates {
  std::vector<std::string> labels;
  std::vector<std::optional<double>> per_class;  // nullopt for empty rows
  std::optional<double> overall;

  std::string to_json() const;
};

ClassificationRates classification_rates(const ConfusionMatrix& m);

}  // namespace atdr
