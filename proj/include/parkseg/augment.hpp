#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "parkseg/mask.hpp"

namespace parkseg {

struct HFlip {
  friend bool operator==(const HFlip&, const HFlip&) = default;
};
struct VFlip {
  friend bool operator==(const VFlip&, const VFlip&) = default;
};
/// Clockwise quarter turns; any integer, taken modulo 4.
struct Rot90 {
  int k = 1;
  friend bool operator==(const Rot90&, const Rot90&) = default;
};
/// Crop a window of linear size `scale` centered at (cx, cy) in pixel
/// coordinates and resize it back to the full image.
struct Zoom {
  double scale = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  friend bool operator==(const Zoom&, const Zoom&) = default;
};
struct Brightness {
  double factor = 1.0;
  friend bool operator==(const Brightness&, const Brightness&) = default;
};
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};
/// Multiplies channels by `attenuation` for pixels whose center lies inside
/// the polygon (even-odd rule). Vertices are in pixel-edge coordinates,
/// i.e. within [0, width] x [0, height].
struct Shadow {
  std::vector<Point2> polygon;
  double attenuation = 1.0;
  friend bool operator==(const Shadow&, const Shadow&) = default;
};

using GeometricOp = std::variant<HFlip, VFlip, Rot90, Zoom>;
using PhotometricOp = std::variant<Brightness, Shadow>;
using AugmentOp = std::variant<HFlip, VFlip, Rot90, Zoom, Brightness, Shadow>;

/// Applies the same geometric map to image and mask. Flips and rotations
/// permute pixels exactly; zoom resamples the image bilinearly and the mask
/// by nearest neighbor.
std::pair<RgbImage, Mask> apply_geometric(const RgbImage& image, const Mask& mask, const GeometricOp& op);
RgbImage apply_photometric(const RgbImage& image, const PhotometricOp& op);
std::pair<RgbImage, Mask> apply_ops(const RgbImage& image, const Mask& mask, const std::vector<AugmentOp>& ops);

/// Random pipeline stages. Each stage draws its parameters when sampled.
struct FlipStage {
  bool horizontal = true;
  double probability = 0.5;
};
struct RotateStage {
  std::optional<int> k;  // nullopt: uniform over 0..3 quarter turns
};
struct ZoomStage {
  double min_scale = 0.8;
};
struct BrightnessStage {
  double lo = 0.8;
  double hi = 1.2;
};
struct ShadowStage {
  int count = 1;
  double attenuation_lo = 0.5;
  double attenuation_hi = 0.9;
};

using AugmentStage = std::variant<FlipStage, RotateStage, ZoomStage, BrightnessStage, ShadowStage>;

struct AugmentSpec {
  std::uint64_t seed = 0;
  std::vector<AugmentStage> stages;

  /// hflip, vflip, rot90, zoom(0.8), brightness(0.8, 1.2), shadow(1, 0.5, 0.9).
  static AugmentSpec defaults(std::uint64_t seed = 0);
};

/// Throws BadScale / BadFactor / BadConfig on parameter violations.
void validate(const AugmentSpec& spec);

/// Concrete operations for sample `index` of an image of the given size.
/// Fully determined by (spec.seed, index, width, height).
std::vector<AugmentOp> sample_augmentation(const AugmentSpec& spec, std::uint64_t index, int width, int height);

AugmentSpec parse_augment_spec(std::string_view json);
std::string to_json(const AugmentSpec& spec);
std::string ops_to_json(const std::vector<AugmentOp>& ops);

/// Pixels whose centers (x + 0.5, y + 0.5) fall inside the polygon, by
/// scanline even-odd filling.
std::vector<std::pair<int, int>> polygon_pixels(const std::vector<Point2>& polygon, int width, int height);

}  // namespace parkseg
