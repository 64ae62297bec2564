#include "parkseg/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "parkseg/error.hpp"

namespace parkseg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_same_shape(const RgbImage& image, const Mask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height())
    throw Error(ErrorKind::DimensionMismatch, "image and mask differ in size");
}

std::pair<RgbImage, Mask> flip(const RgbImage& image, const Mask& mask, bool horizontal) {
  const int w = image.width();
  const int h = image.height();
  RgbImage img(w, h);
  Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = horizontal ? w - 1 - x : x;
      const int sy = horizontal ? y : h - 1 - y;
      img.set(x, y, image.at(sx, sy));
      m.at(x, y) = mask.at(sx, sy);
    }
  }
  return {std::move(img), std::move(m)};
}

std::pair<RgbImage, Mask> rotate(const RgbImage& image, const Mask& mask, int k) {
  k = ((k % 4) + 4) % 4;
  if (k == 0) return {image, mask};
  const int w = image.width();
  const int h = image.height();
  const int ow = k == 2 ? w : h;
  const int oh = k == 2 ? h : w;
  RgbImage img(ow, oh);
  Mask m(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      int sx, sy;
      switch (k) {
        case 1: sx = y; sy = h - 1 - x; break;          // clockwise
        case 2: sx = w - 1 - x; sy = h - 1 - y; break;
        default: sx = w - 1 - y; sy = x; break;          // counter-clockwise
      }
      img.set(x, y, image.at(sx, sy));
      m.at(x, y) = mask.at(sx, sy);
    }
  }
  return {std::move(img), std::move(m)};
}

std::pair<RgbImage, Mask> zoom(const RgbImage& image, const Mask& mask, const Zoom& z) {
  if (!(z.scale > 0.0 && z.scale <= 1.0))
    throw Error(ErrorKind::BadScale, "zoom scale must be in (0, 1], got " + std::to_string(z.scale));
  const int w = image.width();
  const int h = image.height();
  const int cw = std::max(1, static_cast<int>(std::lround(z.scale * w)));
  const int ch = std::max(1, static_cast<int>(std::lround(z.scale * h)));
  const int x0 = static_cast<int>(std::lround(z.cx - cw / 2.0));
  const int y0 = static_cast<int>(std::lround(z.cy - ch / 2.0));
  if (x0 < 0 || y0 < 0 || x0 + cw > w || y0 + ch > h)
    throw Error(ErrorKind::OutOfBounds, "zoom window leaves the image");

  RgbImage img(w, h);
  Mask m(w, h);
  for (int y = 0; y < h; ++y) {
    const double fy_src = (y + 0.5) * ch / h;
    const int ny = y0 + std::min(ch - 1, static_cast<int>(std::floor(fy_src)));
    const double sy = std::clamp(fy_src - 0.5, 0.0, static_cast<double>(ch - 1));
    const int iy = static_cast<int>(std::floor(sy));
    const int iy1 = std::min(iy + 1, ch - 1);
    const double wy = sy - iy;
    for (int x = 0; x < w; ++x) {
      const double fx_src = (x + 0.5) * cw / w;
      const int nx = x0 + std::min(cw - 1, static_cast<int>(std::floor(fx_src)));
      m.at(x, y) = mask.at(nx, ny);

      const double sx = std::clamp(fx_src - 0.5, 0.0, static_cast<double>(cw - 1));
      const int ix = static_cast<int>(std::floor(sx));
      const int ix1 = std::min(ix + 1, cw - 1);
      const double wx = sx - ix;
      const Rgb a = image.at(x0 + ix, y0 + iy);
      const Rgb b = image.at(x0 + ix1, y0 + iy);
      const Rgb c = image.at(x0 + ix, y0 + iy1);
      const Rgb d = image.at(x0 + ix1, y0 + iy1);
      auto mix = [&](std::uint8_t pa, std::uint8_t pb, std::uint8_t pc, std::uint8_t pd) {
        const double top = pa * (1.0 - wx) + pb * wx;
        const double bottom = pc * (1.0 - wx) + pd * wx;
        return static_cast<std::uint8_t>(std::clamp(std::lround(top * (1.0 - wy) + bottom * wy), 0L, 255L));
      };
      img.set(x, y, {mix(a.r, b.r, c.r, d.r), mix(a.g, b.g, c.g, d.g), mix(a.b, b.b, c.b, d.b)});
    }
  }
  return {std::move(img), std::move(m)};
}

std::uint8_t scale_channel(std::uint8_t v, double f) {
  return static_cast<std::uint8_t>(std::min(255.0, std::floor(v * f)));
}

}  // namespace

std::vector<std::pair<int, int>> polygon_pixels(const std::vector<Point2>& polygon, int width, int height) {
  std::vector<std::pair<int, int>> out;
  const std::size_t n = polygon.size();
  std::vector<double> crossings;
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    crossings.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = polygon[i];
      const Point2& b = polygon[(i + 1) % n];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y))
        crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      // centers x + 0.5 in [left, right)
      const int first = std::max(0, static_cast<int>(std::ceil(crossings[i] - 0.5)));
      const int last = std::min(width - 1, static_cast<int>(std::ceil(crossings[i + 1] - 0.5)) - 1);
      for (int x = first; x <= last; ++x) out.emplace_back(x, y);
    }
  }
  return out;
}

std::pair<RgbImage, Mask> apply_geometric(const RgbImage& image, const Mask& mask, const GeometricOp& op) {
  require_same_shape(image, mask);
  return std::visit(Overloaded{
                        [&](const HFlip&) { return flip(image, mask, true); },
                        [&](const VFlip&) { return flip(image, mask, false); },
                        [&](const Rot90& r) { return rotate(image, mask, r.k); },
                        [&](const Zoom& z) { return zoom(image, mask, z); },
                    },
                    op);
}

RgbImage apply_photometric(const RgbImage& image, const PhotometricOp& op) {
  return std::visit(
      Overloaded{
          [&](const Brightness& b) {
            if (!(b.factor > 0.0) || !std::isfinite(b.factor))
              throw Error(ErrorKind::BadFactor, "brightness factor must be positive");
            RgbImage out = image;
            for (auto& v : out.data()) v = scale_channel(v, b.factor);
            return out;
          },
          [&](const Shadow& s) {
            if (!(s.attenuation > 0.0 && s.attenuation <= 1.0))
              throw Error(ErrorKind::BadFactor, "shadow attenuation must be in (0, 1]");
            if (s.polygon.size() < 3) throw Error(ErrorKind::BadConfig, "shadow polygon needs at least 3 vertices");
            for (const auto& p : s.polygon) {
              if (!(p.x >= 0.0 && p.y >= 0.0 && p.x <= image.width() && p.y <= image.height()))
                throw Error(ErrorKind::OutOfBounds, "shadow vertex outside the image");
            }
            RgbImage out = image;
            for (const auto& [x, y] : polygon_pixels(s.polygon, image.width(), image.height())) {
              const Rgb c = out.at(x, y);
              out.set(x, y,
                      {scale_channel(c.r, s.attenuation), scale_channel(c.g, s.attenuation),
                       scale_channel(c.b, s.attenuation)});
            }
            return out;
          },
      },
      op);
}

std::pair<RgbImage, Mask> apply_ops(const RgbImage& image, const Mask& mask, const std::vector<AugmentOp>& ops) {
  require_same_shape(image, mask);
  std::pair<RgbImage, Mask> cur{image, mask};
  for (const auto& op : ops) {
    std::visit(Overloaded{
                   [&](const Brightness& b) { cur.first = apply_photometric(cur.first, b); },
                   [&](const Shadow& s) { cur.first = apply_photometric(cur.first, s); },
                   [&](const auto& g) { cur = apply_geometric(cur.first, cur.second, g); },
               },
               op);
  }
  return cur;
}

AugmentSpec AugmentSpec::defaults(std::uint64_t seed) {
  return {seed,
          {FlipStage{true, 0.5}, FlipStage{false, 0.5}, RotateStage{}, ZoomStage{0.8}, BrightnessStage{0.8, 1.2},
           ShadowStage{1, 0.5, 0.9}}};
}

void validate(const AugmentSpec& spec) {
  for (const auto& stage : spec.stages) {
    std::visit(Overloaded{
                   [](const FlipStage& f) {
                     if (!(f.probability >= 0.0 && f.probability <= 1.0))
                       throw Error(ErrorKind::BadConfig, "flip probability must be in [0, 1]");
                   },
                   [](const RotateStage&) {},
                   [](const ZoomStage& z) {
                     if (!(z.min_scale > 0.0 && z.min_scale <= 1.0))
                       throw Error(ErrorKind::BadScale, "min_scale must be in (0, 1]");
                   },
                   [](const BrightnessStage& b) {
                     if (!(b.lo > 0.0 && b.lo <= b.hi && std::isfinite(b.hi)))
                       throw Error(ErrorKind::BadFactor, "brightness range must satisfy 0 < lo <= hi");
                   },
                   [](const ShadowStage& s) {
                     if (s.count < 0) throw Error(ErrorKind::BadConfig, "shadow count must be non-negative");
                     if (!(s.attenuation_lo > 0.0 && s.attenuation_lo <= s.attenuation_hi && s.attenuation_hi <= 1.0))
                       throw Error(ErrorKind::BadFactor, "shadow attenuation range must lie in (0, 1]");
                   },
               },
               stage);
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// std distributions are implementation-defined, so draws are derived
// directly from the engine output to stay identical across toolchains.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t index) : engine_(splitmix64(seed ^ splitmix64(index))) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

Shadow random_shadow(Rng& rng, int w, int h, double attenuation) {
  const double cx = rng.uniform(0.0, w);
  const double cy = rng.uniform(0.0, h);
  const double reach = std::min({cx, w - cx, cy, h - cy});
  const double radius = reach * rng.uniform(0.3, 1.0);
  const int sides = rng.integer(3, 6);
  std::vector<double> angles(static_cast<std::size_t>(sides));
  for (auto& a : angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  Shadow s;
  s.attenuation = attenuation;
  for (double a : angles) {
    s.polygon.push_back({std::clamp(cx + radius * std::cos(a), 0.0, static_cast<double>(w)),
                         std::clamp(cy + radius * std::sin(a), 0.0, static_cast<double>(h))});
  }
  return s;
}

}  // namespace

std::vector<AugmentOp> sample_augmentation(const AugmentSpec& spec, std::uint64_t index, int width, int height) {
  validate(spec);
  Rng rng(spec.seed, index);
  std::vector<AugmentOp> ops;
  int w = width;
  int h = height;
  for (const auto& stage : spec.stages) {
    std::visit(Overloaded{
                   [&](const FlipStage& f) {
                     if (rng.uniform() < f.probability) {
                       if (f.horizontal) ops.emplace_back(HFlip{});
                       else ops.emplace_back(VFlip{});
                     }
                   },
                   [&](const RotateStage& r) {
                     const int k = r.k ? ((*r.k % 4) + 4) % 4 : rng.integer(0, 3);
                     if (k != 0) ops.emplace_back(Rot90{k});
                     if (k % 2 == 1) std::swap(w, h);
                   },
                   [&](const ZoomStage& z) {
                     const double scale = rng.uniform(z.min_scale, 1.0);
                     const int cw = std::max(1, static_cast<int>(std::lround(scale * w)));
                     const int ch = std::max(1, static_cast<int>(std::lround(scale * h)));
                     const int x0 = rng.integer(0, w - cw);
                     const int y0 = rng.integer(0, h - ch);
                     ops.emplace_back(Zoom{scale, x0 + cw / 2.0, y0 + ch / 2.0});
                   },
                   [&](const BrightnessStage& b) { ops.emplace_back(Brightness{rng.uniform(b.lo, b.hi)}); },
                   [&](const ShadowStage& s) {
                     for (int i = 0; i < s.count; ++i) {
                       const double att = rng.uniform(s.attenuation_lo, s.attenuation_hi);
                       ops.emplace_back(random_shadow(rng, w, h, att));
                     }
                   },
               },
               stage);
  }
  return ops;
}

namespace {

nlohmann::json stage_to_json(const AugmentStage& stage) {
  return std::visit(Overloaded{
                        [](const FlipStage& f) {
                          return nlohmann::json{{"type", f.horizontal ? "hflip" : "vflip"}, {"p", f.probability}};
                        },
                        [](const RotateStage& r) {
                          nlohmann::json j{{"type", "rot90"}};
                          if (r.k) j["k"] = *r.k;
                          return j;
                        },
                        [](const ZoomStage& z) { return nlohmann::json{{"type", "zoom"}, {"min_scale", z.min_scale}}; },
                        [](const BrightnessStage& b) {
                          return nlohmann::json{{"type", "brightness"}, {"lo", b.lo}, {"hi", b.hi}};
                        },
                        [](const ShadowStage& s) {
                          return nlohmann::json{{"type", "shadow"},
                                                {"count", s.count},
                                                {"attenuation_lo", s.attenuation_lo},
                                                {"attenuation_hi", s.attenuation_hi}};
                        },
                    },
                    stage);
}

}  // namespace

AugmentSpec parse_augment_spec(std::string_view text) {
  AugmentSpec spec;
  try {
    const auto doc = nlohmann::json::parse(text);
    spec.seed = doc.value("seed", std::uint64_t{0});
    for (const auto& s : doc.at("ops")) {
      const auto type = s.at("type").get<std::string>();
      if (type == "hflip" || type == "vflip") {
        spec.stages.emplace_back(FlipStage{type == "hflip", s.value("p", 0.5)});
      } else if (type == "rot90") {
        RotateStage r;
        if (s.contains("k")) r.k = s.at("k").get<int>();
        spec.stages.emplace_back(r);
      } else if (type == "zoom") {
        spec.stages.emplace_back(ZoomStage{s.value("min_scale", 0.8)});
      } else if (type == "brightness") {
        spec.stages.emplace_back(BrightnessStage{s.value("lo", 0.8), s.value("hi", 1.2)});
      } else if (type == "shadow") {
        spec.stages.emplace_back(
            ShadowStage{s.value("count", 1), s.value("attenuation_lo", 0.5), s.value("attenuation_hi", 0.9)});
      } else {
        throw Error(ErrorKind::BadConfig, "unknown augmentation op '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadConfig, std::string("bad augmentation spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

std::string to_json(const AugmentSpec& spec) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& s : spec.stages) ops.push_back(stage_to_json(s));
  return nlohmann::json{{"seed", spec.seed}, {"ops", ops}}.dump(2);
}

std::string ops_to_json(const std::vector<AugmentOp>& ops) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& op : ops) {
    out.push_back(std::visit(
        Overloaded{
            [](const HFlip&) { return nlohmann::json{{"type", "hflip"}}; },
            [](const VFlip&) { return nlohmann::json{{"type", "vflip"}}; },
            [](const Rot90& r) { return nlohmann::json{{"type", "rot90"}, {"k", r.k}}; },
            [](const Zoom& z) { return nlohmann::json{{"type", "zoom"}, {"scale", z.scale}, {"cx", z.cx}, {"cy", z.cy}}; },
            [](const Brightness& b) { return nlohmann::json{{"type", "brightness"}, {"factor", b.factor}}; },
            [](const Shadow& s) {
              nlohmann::json poly = nlohmann::json::array();
              for (const auto& p : s.polygon) poly.push_back({p.x, p.y});
              return nlohmann::json{{"type", "shadow"}, {"attenuation", s.attenuation}, {"polygon", poly}};
            },
        },
        op));
  }
  return out.dump();
}

}  // namespace parkseg
