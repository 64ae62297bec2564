#include "parkseg/parkdetect.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "parkseg/error.hpp"

namespace parkseg {

namespace {

struct Roles {
  ClassId background;
  ClassId road;
  ClassId car;
  std::optional<ClassId> target;
};

Roles resolve_roles(const Mask& mask, const Palette& palette, const ParkedOptions& options) {
  if (options.kernel < 1 || options.kernel % 2 == 0)
    throw Error(ErrorKind::EvenKernel, "kernel must be odd and positive, got " + std::to_string(options.kernel));
  Roles roles{palette.require(Role::Background), palette.require(Role::Road), palette.require(Role::Car),
              palette.id_for(Role::ParkedCar)};
  if (!roles.target) roles.target = options.parked_target;
  if (roles.target && !palette.contains(*roles.target))
    throw Error(ErrorKind::UnknownClassId, "parked target class " + std::to_string(*roles.target) +
                                               " is not in the palette");
  check_labels(mask, palette);
  return roles;
}

ClassId parked_target_or_throw(const Roles& roles) {
  if (!roles.target)
    throw Error(ErrorKind::MissingParkedTarget,
                "a car component must be relabeled but the palette has no parked_car class and no target was set");
  return *roles.target;
}

struct Box {
  int x0, y0, x1, y1;  // inclusive
};

}  // namespace

ParkedResult detect_parked(const Mask& mask, const Palette& palette, const ParkedOptions& options) {
  const Roles roles = resolve_roles(mask, palette, options);
  const int w = mask.width();
  const int h = mask.height();
  const int radius = (options.kernel - 1) / 2;

  const auto components = connected_components(BinaryMask::of_class(mask, roles.car), Connectivity::Eight);
  const auto contours = all_boundaries(components);
  const auto n = static_cast<std::size_t>(components.count);

  std::vector<ComponentVerdict> verdicts(n);
  std::vector<Box> contour_box(n, Box{w, h, -1, -1});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t id = components.at(x, y);
      if (id == 0) continue;
      auto& v = verdicts[static_cast<std::size_t>(id - 1)];
      if (v.car_pixel_count++ == 0) {
        v.component_id = id;
        v.anchor = mask.index(x, y);
      }
      if (contours.at(x, y)) {
        auto& b = contour_box[static_cast<std::size_t>(id - 1)];
        b.x0 = std::min(b.x0, x);
        b.y0 = std::min(b.y0, y);
        b.x1 = std::max(b.x1, x);
        b.y1 = std::max(b.y1, y);
      }
    }
  }

  // Each component's band lies within its contour bounding box grown by the
  // kernel radius, so dilation runs on that window only.
  for (std::size_t k = 0; k < n; ++k) {
    const std::int32_t id = static_cast<std::int32_t>(k + 1);
    const Box& b = contour_box[k];
    const int x0 = std::max(0, b.x0 - radius);
    const int y0 = std::max(0, b.y0 - radius);
    const int x1 = std::min(w - 1, b.x1 + radius);
    const int y1 = std::min(h - 1, b.y1 + radius);
    const int ww = x1 - x0 + 1;
    const int wh = y1 - y0 + 1;

    BinaryMask contour(ww, wh);
    for (int y = b.y0; y <= b.y1; ++y) {
      for (int x = b.x0; x <= b.x1; ++x) {
        if (components.at(x, y) == id && contours.at(x, y)) contour.set(x - x0, y - y0, true);
      }
    }
    const BinaryMask band = dilate_rect(contour, options.kernel, options.kernel);

    auto& v = verdicts[k];
    for (int y = 0; y < wh; ++y) {
      for (int x = 0; x < ww; ++x) {
        if (!band.at(x, y)) continue;
        const ClassId label = mask.at(x + x0, y + y0);
        if (label == roles.background) ++v.background_votes;
        else if (label == roles.road) ++v.road_votes;
      }
    }
    v.reclassified = v.background_votes > v.road_votes;
  }

  Mask out = mask;
  if (std::any_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.reclassified; })) {
    const ClassId target = parked_target_or_throw(roles);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::int32_t id = components.labels[i];
      if (id != 0 && verdicts[static_cast<std::size_t>(id - 1)].reclassified) out.labels()[i] = target;
    }
  }
  return {std::move(out), std::move(verdicts)};
}

ParkedResult detect_parked_naive(const Mask& mask, const Palette& palette, const ParkedOptions& options) {
  const Roles roles = resolve_roles(mask, palette, options);
  const int w = mask.width();
  const int h = mask.height();
  const int radius = (options.kernel - 1) / 2;
  auto is_car = [&](int x, int y) { return mask.at(x, y) == roles.car; };

  std::vector<int> owner(mask.size(), 0);
  std::vector<ComponentVerdict> verdicts;
  std::vector<std::vector<std::pair<int, int>>> members;

  // Breadth-first flood fill over the 8-neighborhood, seeded in raster order.
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (!is_car(sx, sy) || owner[mask.index(sx, sy)] != 0) continue;
      const int id = static_cast<int>(verdicts.size()) + 1;
      std::vector<std::pair<int, int>> pixels;
      std::deque<std::pair<int, int>> queue{{sx, sy}};
      owner[mask.index(sx, sy)] = id;
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        pixels.emplace_back(x, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!is_car(nx, ny) || owner[mask.index(nx, ny)] != 0) continue;
            owner[mask.index(nx, ny)] = id;
            queue.emplace_back(nx, ny);
          }
        }
      }
      ComponentVerdict v;
      v.component_id = id;
      v.anchor = mask.index(sx, sy);
      v.car_pixel_count = pixels.size();
      verdicts.push_back(v);
      members.push_back(std::move(pixels));
    }
  }

  std::vector<int> stamp(mask.size(), 0);
  for (std::size_t k = 0; k < verdicts.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && owner[mask.index(x, y)] == id; };
    auto& v = verdicts[k];
    for (const auto& [x, y] : members[k]) {
      const bool contour = !inside(x - 1, y) || !inside(x + 1, y) || !inside(x, y - 1) || !inside(x, y + 1);
      if (!contour) continue;
      for (int py = std::max(0, y - radius); py <= std::min(h - 1, y + radius); ++py) {
        for (int px = std::max(0, x - radius); px <= std::min(w - 1, x + radius); ++px) {
          auto& s = stamp[mask.index(px, py)];
          if (s == id) continue;
          s = id;
          const ClassId label = mask.at(px, py);
          if (label == roles.background) ++v.background_votes;
          else if (label == roles.road) ++v.road_votes;
        }
      }
    }
    v.reclassified = v.background_votes > v.road_votes;
  }

  Mask out = mask;
  for (std::size_t k = 0; k < verdicts.size(); ++k) {
    if (!verdicts[k].reclassified) continue;
    const ClassId target = parked_target_or_throw(roles);
    for (const auto& [x, y] : members[k]) out.at(x, y) = target;
  }
  return {std::move(out), std::move(verdicts)};
}

std::string verdict_report(const std::vector<ComponentVerdict>& verdicts) {
  std::ostringstream os;
  os << "component_id,car_pixels,background_votes,road_votes,decision\n";
  for (const auto& v : verdicts) {
    os << v.component_id << ',' << v.car_pixel_count << ',' << v.background_votes << ',' << v.road_votes << ','
       << (v.reclassified ? "parked" : "unchanged") << '\n';
  }
  return os.str();
}

}  // namespace parkseg
