#pragma once

#include <cstdint>
#include <vector>

#include "parkseg/mask.hpp"

namespace parkseg {

/// Row-major boolean raster (one byte per pixel, 0 or 1).
class BinaryMask {
 public:
  BinaryMask(int width, int height, bool fill = false);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  static BinaryMask of_class(const Mask& mask, ClassId id);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  std::size_t count() const noexcept;

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

enum class Connectivity { Four = 4, Eight = 8 };

/// Component id per pixel (0 = background); ids 1..count are assigned in
/// raster order of each component's first pixel.
struct ComponentLabels {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;
  std::int32_t count = 0;

  std::int32_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
};

ComponentLabels connected_components(const BinaryMask& bm, Connectivity connectivity = Connectivity::Eight);

/// Pixels of component `id` with at least one 4-neighbor outside the
/// component; the image border counts as outside. Throws UnknownComponentId.
BinaryMask boundary(const ComponentLabels& labels, std::int32_t id);

/// Union of boundary(labels, k) over all components, in one pass.
BinaryMask all_boundaries(const ComponentLabels& labels);

/// Rectangular dilation with the anchor at the kernel center, clipped at the
/// image border. Both kernel sides must be odd and positive (EvenKernel).
BinaryMask dilate_rect(const BinaryMask& bm, int kernel_w, int kernel_h);

}  // namespace parkseg
