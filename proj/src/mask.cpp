#include "parkseg/mask.hpp"

#include <string>

#include "parkseg/error.hpp"

namespace parkseg {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1)
    throw Error(ErrorKind::DimensionMismatch,
                "image dimensions must be positive, got " + std::to_string(width) + "x" + std::to_string(height));
}

}  // namespace

Mask::Mask(int width, int height, ClassId fill) : width_(width), height_(height) {
  check_dims(width, height);
  labels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Mask::Mask(int width, int height, std::vector<ClassId> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  check_dims(width, height);
  if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error(ErrorKind::DimensionMismatch, "label buffer does not match mask dimensions");
}

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  check_dims(width, height);
  data_.resize(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_dims(width, height);
  if (data_.size() != 3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error(ErrorKind::DimensionMismatch, "pixel buffer does not match image dimensions");
}

ClassHistogram class_histogram(const Mask& mask) {
  std::array<std::size_t, 256> counts{};
  for (ClassId v : mask.labels()) ++counts[v];
  ClassHistogram out;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] != 0) out[static_cast<ClassId>(c)] = counts[c];
  }
  return out;
}

void check_labels(const Mask& mask, const Palette& palette) {
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!palette.contains(mask.at(x, y)))
        throw Error(ErrorKind::UnknownClassId, "class id " + std::to_string(mask.at(x, y)) + " at (" +
                                                   std::to_string(x) + "," + std::to_string(y) +
                                                   ") is not in the palette");
    }
  }
}

}  // namespace parkseg
