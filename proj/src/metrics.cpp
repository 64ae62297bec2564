#include "parkseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parkseg/error.hpp"

namespace parkseg {

ConfusionMatrix::ConfusionMatrix(std::vector<ClassId> classes)
    : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {}

ConfusionMatrix::ConfusionMatrix(std::vector<ClassId> classes, std::vector<std::uint64_t> counts)
    : classes_(std::move(classes)), counts_(std::move(counts)) {
  if (counts_.size() != classes_.size() * classes_.size())
    throw Error(ErrorKind::DimensionMismatch, "confusion counts must be K*K");
}

std::size_t ConfusionMatrix::index_of(ClassId id) const {
  const auto it = std::find(classes_.begin(), classes_.end(), id);
  if (it == classes_.end()) throw Error(ErrorKind::UnknownClass, "class " + std::to_string(id) + " not in matrix");
  return static_cast<std::size_t>(it - classes_.begin());
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t gt) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < num_classes(); ++j) s += at(gt, j);
  return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t pred) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < num_classes(); ++i) s += at(i, pred);
  return s;
}

std::uint64_t ConfusionMatrix::tp(ClassId c) const {
  const auto k = index_of(c);
  return at(k, k);
}
std::uint64_t ConfusionMatrix::fp(ClassId c) const { return column_sum(index_of(c)) - tp(c); }
std::uint64_t ConfusionMatrix::fn(ClassId c) const { return row_sum(index_of(c)) - tp(c); }
std::uint64_t ConfusionMatrix::tn(ClassId c) const { return total() - tp(c) - fp(c) - fn(c); }

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw Error(ErrorKind::DimensionMismatch, "confusion matrices over different classes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix make_confusion(const Palette& palette) {
  std::vector<ClassId> ids;
  for (const auto& e : palette.entries()) ids.push_back(e.id);
  return ConfusionMatrix(std::move(ids));
}

namespace {

void require_same_shape(const Mask& gt, const Mask& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height())
    throw Error(ErrorKind::DimensionMismatch, "ground truth is " + std::to_string(gt.width()) + "x" +
                                                  std::to_string(gt.height()) + " but prediction is " +
                                                  std::to_string(pred.width()) + "x" + std::to_string(pred.height()));
}

}  // namespace

ConfusionMatrix confusion(const Mask& gt, const Mask& pred, const Palette& palette) {
  require_same_shape(gt, pred);
  ConfusionMatrix cm = make_confusion(palette);
  std::array<int, 256> dense;
  dense.fill(-1);
  for (const auto& e : palette.entries()) dense[e.id] = static_cast<int>(palette.index_of(e.id));

  const auto& g = gt.labels();
  const auto& p = pred.labels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const int gi = dense[g[i]];
    const int pi = dense[p[i]];
    if (gi < 0 || pi < 0)
      throw Error(ErrorKind::UnknownClassId, "class id " + std::to_string(gi < 0 ? g[i] : p[i]) + " not in palette");
    ++cm.at(static_cast<std::size_t>(gi), static_cast<std::size_t>(pi));
  }
  return cm;
}

std::optional<double> foreground_accuracy(const ConfusionMatrix& cm, ClassId background) {
  const auto bg = cm.index_of(background);
  std::uint64_t correct = 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    if (i == bg) continue;
    correct += cm.at(i, i);
    total += cm.row_sum(i);
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> foreground_accuracy(const Mask& gt, const Mask& pred, const Palette& palette) {
  return foreground_accuracy(confusion(gt, pred, palette), palette.background());
}

std::optional<double> dice_per_class(const ConfusionMatrix& cm, ClassId c) {
  const double tp = static_cast<double>(cm.tp(c));
  const double denom = 2.0 * tp + static_cast<double>(cm.fp(c)) + static_cast<double>(cm.fn(c));
  if (denom == 0.0) return std::nullopt;
  return 2.0 * tp / denom;
}

std::optional<double> jaccard_per_class(const ConfusionMatrix& cm, ClassId c) {
  const double tp = static_cast<double>(cm.tp(c));
  const double denom = tp + static_cast<double>(cm.fp(c)) + static_cast<double>(cm.fn(c));
  if (denom == 0.0) return std::nullopt;
  return tp / denom;
}

double macro_average(std::span<const ClassScore> scores, std::optional<ClassId> excluded) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : scores) {
    if (excluded && s.id == *excluded) continue;
    if (!s.value) continue;
    sum += *s.value;
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::AllUndefined, "no defined per-class value to average");
  return sum / static_cast<double>(n);
}

std::vector<ClassScore> dice_scores(const ConfusionMatrix& cm) {
  std::vector<ClassScore> out;
  for (ClassId c : cm.classes()) out.push_back({c, dice_per_class(cm, c)});
  return out;
}

std::vector<ClassScore> jaccard_scores(const ConfusionMatrix& cm) {
  std::vector<ClassScore> out;
  for (ClassId c : cm.classes()) out.push_back({c, jaccard_per_class(cm, c)});
  return out;
}

double focal_loss(const ProbabilityMap& probs, const Mask& gt, const Palette& palette, const FocalParams& params) {
  if (probs.width != gt.width() || probs.height != gt.height() || probs.num_classes != palette.size() ||
      probs.values.size() != gt.size() * probs.num_classes)
    throw Error(ErrorKind::DimensionMismatch, "probability map does not match mask and palette");
  if (params.alpha.size() != palette.size())
    throw Error(ErrorKind::DimensionMismatch, "focal alpha needs one weight per class");
  if (!(params.gamma >= 0.0)) throw Error(ErrorKind::BadConfig, "focal gamma must be non-negative");
  for (double a : params.alpha) {
    if (!(a >= 0.0)) throw Error(ErrorKind::BadConfig, "focal alpha weights must be non-negative");
  }

  const std::size_t k = probs.num_classes;
  double total = 0.0;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        const double p = probs.at(x, y, c);
        if (!(p >= 0.0 && p <= 1.0))
          throw Error(ErrorKind::BadDistribution, "probability outside [0,1] at (" + std::to_string(x) + "," +
                                                      std::to_string(y) + ")");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-6)
        throw Error(ErrorKind::BadDistribution, "probabilities at (" + std::to_string(x) + "," + std::to_string(y) +
                                                    ") do not sum to 1");
      const std::size_t truth = palette.index_of(gt.at(x, y));
      const double p = std::clamp(probs.at(x, y, truth), kFocalEpsilon, 1.0);
      total += -params.alpha[truth] * std::pow(1.0 - p, params.gamma) * std::log(p);
    }
  }
  return total / static_cast<double>(gt.size());
}

EvaluationReport evaluate(const ConfusionMatrix& cm, const Palette& palette) {
  EvaluationReport r;
  const ClassId bg = palette.background();
  const auto dice = dice_scores(cm);
  const auto jac = jaccard_scores(cm);
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    const ClassId c = cm.classes()[i];
    r.classes.push_back({c, palette.entry(c).name, cm.tp(c), cm.fp(c), cm.fn(c), cm.tn(c), dice[i].value,
                         jac[i].value});
  }
  r.foreground_accuracy = foreground_accuracy(cm, bg);
  auto safe = [](auto&& f) -> std::optional<double> {
    try {
      return f();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::AllUndefined) return std::nullopt;
      throw;
    }
  };
  r.macro_dice = safe([&] { return macro_average(dice, bg); });
  r.macro_jaccard = safe([&] { return macro_average(jac, bg); });
  r.macro_dice_with_bg = safe([&] { return macro_average(dice); });
  r.macro_jaccard_with_bg = safe([&] { return macro_average(jac); });
  return r;
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream os;
  os.precision(10);
  os << *v;
  return os.str();
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

std::string report_csv(const EvaluationReport& report, const std::string& scope) {
  std::ostringstream os;
  for (const auto& c : report.classes) {
    os << scope << ',' << c.name << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ',' << fmt(c.dice)
       << ',' << fmt(c.jaccard) << '\n';
  }
  os << scope << ",foreground_accuracy," << fmt(report.foreground_accuracy) << '\n';
  os << scope << ",macro_dice," << fmt(report.macro_dice) << '\n';
  os << scope << ",macro_jaccard," << fmt(report.macro_jaccard) << '\n';
  os << scope << ",macro_dice_with_background," << fmt(report.macro_dice_with_bg) << '\n';
  os << scope << ",macro_jaccard_with_background," << fmt(report.macro_jaccard_with_bg) << '\n';
  return os.str();
}

std::string report_json(const EvaluationReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : report.classes) {
    classes.push_back({{"id", c.id},
                       {"name", c.name},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.fn},
                       {"tn", c.tn},
                       {"dice", opt(c.dice)},
                       {"jaccard", opt(c.jaccard)}});
  }
  return nlohmann::json{{"classes", classes},
                        {"foreground_accuracy", opt(report.foreground_accuracy)},
                        {"macro_dice", opt(report.macro_dice)},
                        {"macro_jaccard", opt(report.macro_jaccard)},
                        {"macro_dice_with_background", opt(report.macro_dice_with_bg)},
                        {"macro_jaccard_with_background", opt(report.macro_jaccard_with_bg)}}
      .dump(2);
}

}  // namespace parkseg
