#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parkseg/mask.hpp"
#include "parkseg/palette.hpp"

namespace parkseg {

using Bytes = std::vector<std::uint8_t>;

/// Decodes any PNG libpng understands to 8-bit RGB (alpha is dropped,
/// grayscale/palette/16-bit inputs are expanded). Throws MalformedImage.
RgbImage decode_png(std::span<const std::uint8_t> png);
Bytes encode_png(const RgbImage& image);

/// Maps each pixel to the palette entry of nearest color. `tolerance` is the
/// largest accepted Euclidean RGB distance; 0 demands an exact match.
/// Throws UnknownColor (no entry within tolerance) or AmbiguousColor (two
/// entries tie at the minimum distance).
Mask decode_mask(std::span<const std::uint8_t> png, const Palette& palette, int tolerance = 0);
Mask mask_from_rgb(const RgbImage& image, const Palette& palette, int tolerance = 0);

/// Throws UnknownClassId for labels the palette lacks.
Bytes encode_mask(const Mask& mask, const Palette& palette);
RgbImage mask_to_rgb(const Mask& mask, const Palette& palette);

Bytes read_file(const std::string& path);
/// Writes to a sibling temporary then renames over `path`.
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace parkseg
