#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parkseg/mask.hpp"
#include "parkseg/morphology.hpp"
#include "parkseg/palette.hpp"

namespace parkseg {

struct ComponentVerdict {
  std::int32_t component_id = 0;
  /// Raster index of the component's first pixel; stable across labelings.
  std::size_t anchor = 0;
  std::size_t car_pixel_count = 0;
  std::size_t background_votes = 0;
  std::size_t road_votes = 0;
  bool reclassified = false;

  friend bool operator==(const ComponentVerdict&, const ComponentVerdict&) = default;
};

struct ParkedOptions {
  int kernel = 15;
  /// Class written over parked components when the palette has no
  /// parked_car role.
  std::optional<ClassId> parked_target;
};

struct ParkedResult {
  Mask mask;
  std::vector<ComponentVerdict> verdicts;  // ordered by component id
};

/// Relabels every 8-connected car component whose dilated contour band holds
/// strictly more background than road pixels. Only background- and
/// road-role pixels vote; car, parked_car and other classes do not.
ParkedResult detect_parked(const Mask& mask, const Palette& palette, const ParkedOptions& options = {});

/// Same contract as detect_parked computed by flood fill and an explicit
/// Chebyshev scan around every contour pixel. Shares no code with the
/// morphology module; exists to cross-check detect_parked.
ParkedResult detect_parked_naive(const Mask& mask, const Palette& palette, const ParkedOptions& options = {});

/// `component_id,car_pixels,background_votes,road_votes,decision` with a
/// header line; decision is `parked` or `unchanged`.
std::string verdict_report(const std::vector<ComponentVerdict>& verdicts);

}  // namespace parkseg
