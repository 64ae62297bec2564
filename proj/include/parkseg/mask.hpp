#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "parkseg/palette.hpp"

namespace parkseg {

/// Row-major grid of class ids.
class Mask {
 public:
  Mask(int width, int height, ClassId fill = 0);
  Mask(int width, int height, std::vector<ClassId> labels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return labels_.size(); }

  ClassId at(int x, int y) const { return labels_[index(x, y)]; }
  ClassId& at(int x, int y) { return labels_[index(x, y)]; }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  std::vector<ClassId>& labels() noexcept { return labels_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_;
  int height_;
  std::vector<ClassId> labels_;
};

/// Row-major interleaved 8-bit RGB raster.
class RgbImage {
 public:
  RgbImage(int width, int height, Rgb fill = {});
  RgbImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Rgb at(int x, int y) const {
    const std::size_t i = offset(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = offset(x, y);
    data_[i] = c.r;
    data_[i + 1] = c.g;
    data_[i + 2] = c.b;
  }
  std::size_t offset(int x, int y) const noexcept {
    return 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x));
  }

  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  std::vector<std::uint8_t>& data() noexcept { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> data_;
};

using ClassHistogram = std::map<ClassId, std::size_t>;

ClassHistogram class_histogram(const Mask& mask);

/// Throws UnknownClassId naming the first offending pixel.
void check_labels(const Mask& mask, const Palette& palette);

}  // namespace parkseg
