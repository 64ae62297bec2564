#include "parkseg/errmask.hpp"

#include "parkseg/error.hpp"

namespace parkseg {

RgbImage error_mask(const Mask& gt, const Mask& pred, const Palette& palette, ErrorMode mode) {
  if (gt.width() != pred.width() || gt.height() != pred.height())
    throw Error(ErrorKind::DimensionMismatch, "ground truth and prediction differ in size");
  if (mode.single_class && !palette.contains(*mode.single_class))
    throw Error(ErrorKind::UnknownClass, "class " + std::to_string(*mode.single_class) + " not in palette");
  check_labels(gt, palette);
  check_labels(pred, palette);

  const ClassId bg = palette.background();
  RgbImage out(gt.width(), gt.height(), kExcluded);
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      const ClassId g = gt.at(x, y);
      const ClassId p = pred.at(x, y);
      if (mode.single_class) {
        const ClassId c = *mode.single_class;
        if (g == c) out.set(x, y, p == c ? kTruePositive : kFalseNegative);
        else if (p == c) out.set(x, y, kFalsePositive);
      } else if (g != bg) {
        out.set(x, y, p == g ? kTruePositive : kFalseNegative);
      } else if (p != bg) {
        out.set(x, y, kFalsePositive);
      }
    }
  }
  return out;
}

ErrorCounts count_error_colors(const RgbImage& image) {
  ErrorCounts c;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb v = image.at(x, y);
      if (v == kTruePositive) ++c.white;
      else if (v == kFalseNegative) ++c.red;
      else if (v == kFalsePositive) ++c.green;
      else if (v == kExcluded) ++c.black;
      else ++c.other;
    }
  }
  return c;
}

}  // namespace parkseg
