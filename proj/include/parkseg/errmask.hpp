#pragma once

#include <optional>

#include "parkseg/mask.hpp"
#include "parkseg/palette.hpp"

namespace parkseg {

inline constexpr Rgb kTruePositive{255, 255, 255};
inline constexpr Rgb kFalseNegative{255, 0, 0};
inline constexpr Rgb kFalsePositive{0, 255, 0};
inline constexpr Rgb kExcluded{0, 0, 0};

/// Which classes count as "positive" when rendering an error mask.
/// Without a class, every non-background class is positive.
struct ErrorMode {
  std::optional<ClassId> single_class;

  static ErrorMode all_foreground() { return {}; }
  static ErrorMode only(ClassId c) { return {c}; }
};

/// White: correct positive. Red: missed (false negative). Green: spurious
/// (false positive). Black: everything else.
RgbImage error_mask(const Mask& gt, const Mask& pred, const Palette& palette, ErrorMode mode = {});

struct ErrorCounts {
  std::size_t white = 0, red = 0, green = 0, black = 0, other = 0;
};

ErrorCounts count_error_colors(const RgbImage& image);

}  // namespace parkseg
