#include "parkseg/png_codec.hpp"

#include <png.h>

#include <atomic>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "parkseg/error.hpp"

namespace parkseg {

namespace {

struct ReadCursor {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
};

struct ErrorSink {
  char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<ErrorSink*>(png_get_error_ptr(png));
  std::snprintf(sink->message, sizeof sink->message, "%s", msg);
  png_longjmp(png, 1);
}
void png_warning_handler(png_structp, png_const_charp) {}

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + length > cur->data.size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, cur->data.data() + cur->pos, length);
  cur->pos += length;
}

void write_callback(png_structp png, png_bytep in, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + length);
}

void flush_callback(png_structp) {}

// Caller-owned state for the libpng calls below. The functions that call
// setjmp keep only trivially destructible locals so a longjmp out of libpng
// skips no destructors.
struct DecodeState {
  ReadCursor cursor;
  ErrorSink errors;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
};

bool decode_rgb8(png_structp png, png_infop info, DecodeState* st) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, &st->cursor, read_callback);
  png_read_info(png, info);

  st->width = png_get_image_width(png, info);
  st->height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (st->width == 0 || st->height == 0 || st->width > (1u << 16) || st->height > (1u << 16))
    png_error(png, "unsupported PNG dimensions");

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const std::size_t stride = 3 * static_cast<std::size_t>(st->width);
  if (png_get_rowbytes(png, info) != stride) png_error(png, "unexpected PNG row layout");

  st->pixels.resize(stride * st->height);
  st->rows.resize(st->height);
  for (std::size_t y = 0; y < st->height; ++y) st->rows[y] = st->pixels.data() + stride * y;
  png_read_image(png, st->rows.data());
  png_read_end(png, nullptr);
  return true;
}

struct EncodeState {
  Bytes out;
  ErrorSink errors;
};

bool encode_rgb8(png_structp png, png_infop info, const RgbImage* image, EncodeState* st) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, &st->out, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image->width()), static_cast<png_uint_32>(image->height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = 3 * static_cast<std::size_t>(image->width());
  for (int y = 0; y < image->height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(image->data().data() + stride * static_cast<std::size_t>(y)));
  }
  png_write_end(png, nullptr);
  return true;
}

std::string describe(Rgb c) {
  return "(" + std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b) + ")";
}

int squared_distance(Rgb a, Rgb b) {
  const int dr = int{a.r} - int{b.r};
  const int dg = int{a.g} - int{b.g};
  const int db = int{a.b} - int{b.b};
  return dr * dr + dg * dg + db * db;
}

std::uint32_t pack(Rgb c) { return (std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b; }

}  // namespace

RgbImage decode_png(std::span<const std::uint8_t> png) {
  if (png.size() < 8 || png_sig_cmp(png.data(), 0, 8) != 0)
    throw Error(ErrorKind::MalformedImage, "missing PNG signature");

  DecodeState st;
  st.cursor.data = png;
  png_structp reader = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st.errors, png_error_handler, png_warning_handler);
  if (!reader) throw Error(ErrorKind::MalformedImage, "libpng initialisation failed");
  png_infop info = png_create_info_struct(reader);
  const bool ok = info != nullptr && decode_rgb8(reader, info, &st);
  png_destroy_read_struct(&reader, info ? &info : nullptr, nullptr);
  if (!ok) throw Error(ErrorKind::MalformedImage, st.errors.message[0] ? st.errors.message : "libpng failure");
  return RgbImage(static_cast<int>(st.width), static_cast<int>(st.height), std::move(st.pixels));
}

Bytes encode_png(const RgbImage& image) {
  EncodeState st;
  png_structp writer = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st.errors, png_error_handler, png_warning_handler);
  if (!writer) throw Error(ErrorKind::MalformedImage, "libpng initialisation failed");
  png_infop info = png_create_info_struct(writer);
  const bool ok = info != nullptr && encode_rgb8(writer, info, &image, &st);
  png_destroy_write_struct(&writer, info ? &info : nullptr);
  if (!ok) throw Error(ErrorKind::MalformedImage, st.errors.message[0] ? st.errors.message : "libpng failure");
  return std::move(st.out);
}

Mask mask_from_rgb(const RgbImage& image, const Palette& palette, int tolerance) {
  if (tolerance < 0) throw Error(ErrorKind::BadConfig, "tolerance must be non-negative");
  const long long limit = static_cast<long long>(tolerance) * tolerance;

  std::unordered_map<std::uint32_t, ClassId> resolved;
  for (const auto& e : palette.entries()) resolved.emplace(pack(e.color), e.id);

  Mask mask(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb c = image.at(x, y);
      const auto key = pack(c);
      if (auto it = resolved.find(key); it != resolved.end()) {
        mask.at(x, y) = it->second;
        continue;
      }
      if (tolerance == 0)
        throw Error(ErrorKind::UnknownColor, "pixel (" + std::to_string(x) + "," + std::to_string(y) + ") has color " +
                                                 describe(c) + " which is not in the palette");

      int best = std::numeric_limits<int>::max();
      const PaletteEntry* best_entry = nullptr;
      bool tie = false;
      for (const auto& e : palette.entries()) {
        const int d = squared_distance(c, e.color);
        if (d < best) {
          best = d;
          best_entry = &e;
          tie = false;
        } else if (d == best) {
          tie = true;
        }
      }
      if (best > limit)
        throw Error(ErrorKind::UnknownColor, "pixel (" + std::to_string(x) + "," + std::to_string(y) + ") has color " +
                                                 describe(c) + " with no palette color within tolerance " +
                                                 std::to_string(tolerance));
      if (tie)
        throw Error(ErrorKind::AmbiguousColor, "pixel (" + std::to_string(x) + "," + std::to_string(y) +
                                                   ") has color " + describe(c) +
                                                   " equidistant from two palette colors");
      resolved.emplace(key, best_entry->id);
      mask.at(x, y) = best_entry->id;
    }
  }
  return mask;
}

Mask decode_mask(std::span<const std::uint8_t> png, const Palette& palette, int tolerance) {
  return mask_from_rgb(decode_png(png), palette, tolerance);
}

RgbImage mask_to_rgb(const Mask& mask, const Palette& palette) {
  std::array<const PaletteEntry*, 256> lut{};
  for (const auto& e : palette.entries()) lut[e.id] = &e;
  RgbImage image(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const ClassId id = mask.at(x, y);
      if (!lut[id])
        throw Error(ErrorKind::UnknownClassId, "class id " + std::to_string(id) + " at (" + std::to_string(x) + "," +
                                                   std::to_string(y) + ") is not in the palette");
      image.set(x, y, lut[id]->color);
    }
  }
  return image;
}

Bytes encode_mask(const Mask& mask, const Palette& palette) { return encode_png(mask_to_rgb(mask, palette)); }

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes) {
  namespace fs = std::filesystem;
  static std::atomic<unsigned long> counter{0};
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename into " + path);
  }
}

void write_file_atomic(const std::string& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace parkseg
