#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkseg/mask.hpp"
#include "parkseg/palette.hpp"

namespace parkseg {

/// K x K pixel counts; rows are ground-truth classes, columns predictions.
/// Class order follows the palette's dense index.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<ClassId> classes);
  ConfusionMatrix(std::vector<ClassId> classes, std::vector<std::uint64_t> counts);

  std::size_t num_classes() const noexcept { return classes_.size(); }
  const std::vector<ClassId>& classes() const noexcept { return classes_; }
  /// Dense index of `id`; throws UnknownClass.
  std::size_t index_of(ClassId id) const;

  std::uint64_t at(std::size_t gt, std::size_t pred) const { return counts_[gt * classes_.size() + pred]; }
  std::uint64_t& at(std::size_t gt, std::size_t pred) { return counts_[gt * classes_.size() + pred]; }

  std::uint64_t total() const noexcept;
  std::uint64_t row_sum(std::size_t gt) const;
  std::uint64_t column_sum(std::size_t pred) const;

  std::uint64_t tp(ClassId c) const;
  std::uint64_t fp(ClassId c) const;
  std::uint64_t fn(ClassId c) const;
  std::uint64_t tn(ClassId c) const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<ClassId> classes_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix make_confusion(const Palette& palette);
ConfusionMatrix confusion(const Mask& gt, const Mask& pred, const Palette& palette);

/// Accuracy over pixels whose ground truth is not background. nullopt when
/// the ground truth has no foreground pixel.
std::optional<double> foreground_accuracy(const Mask& gt, const Mask& pred, const Palette& palette);
std::optional<double> foreground_accuracy(const ConfusionMatrix& cm, ClassId background);

/// 2TP / (2TP + FP + FN); nullopt on 0/0.
std::optional<double> dice_per_class(const ConfusionMatrix& cm, ClassId c);
/// TP / (TP + FP + FN); nullopt on 0/0.
std::optional<double> jaccard_per_class(const ConfusionMatrix& cm, ClassId c);

struct ClassScore {
  ClassId id;
  std::optional<double> value;
};

/// Mean over defined values, skipping `excluded` when given. Throws
/// AllUndefined when nothing remains.
double macro_average(std::span<const ClassScore> scores, std::optional<ClassId> excluded = std::nullopt);

std::vector<ClassScore> dice_scores(const ConfusionMatrix& cm);
std::vector<ClassScore> jaccard_scores(const ConfusionMatrix& cm);

struct FocalParams {
  double gamma = 2.0;
  std::vector<double> alpha;  // one weight per palette class

  static FocalParams uniform(std::size_t num_classes, double gamma = 2.0) {
    return {gamma, std::vector<double>(num_classes, 1.0)};
  }
};

/// Per-pixel class distributions, pixel-major: value(x, y, k) is the
/// probability of the palette's k-th class (dense index).
struct ProbabilityMap {
  int width = 0;
  int height = 0;
  std::size_t num_classes = 0;
  std::vector<double> values;

  double at(int x, int y, std::size_t k) const {
    return values[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
                      num_classes +
                  k];
  }
};

inline constexpr double kFocalEpsilon = 1e-12;

/// Mean over pixels of -alpha[gt] * (1 - p_gt)^gamma * log(p_gt), with p_gt
/// clamped to [kFocalEpsilon, 1].
double focal_loss(const ProbabilityMap& probs, const Mask& gt, const Palette& palette, const FocalParams& params);

struct ClassReport {
  ClassId id;
  std::string name;
  std::uint64_t tp, fp, fn, tn;
  std::optional<double> dice;
  std::optional<double> jaccard;
};

struct EvaluationReport {
  std::vector<ClassReport> classes;
  std::optional<double> foreground_accuracy;
  std::optional<double> macro_dice;               // background excluded
  std::optional<double> macro_jaccard;            // background excluded
  std::optional<double> macro_dice_with_bg;
  std::optional<double> macro_jaccard_with_bg;
};

EvaluationReport evaluate(const ConfusionMatrix& cm, const Palette& palette);

/// Rows `scope,class,tp,fp,fn,tn,dice,jaccard` followed by summary rows;
/// undefined values print as `undefined`.
std::string report_csv(const EvaluationReport& report, const std::string& scope);
std::string report_json(const EvaluationReport& report);

}  // namespace parkseg
