#include "parkseg/synthscene.hpp"

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "parkseg/error.hpp"
#include "parkseg/morphology.hpp"
#include "parkseg/parkdetect.hpp"

namespace parkseg {

const char* to_string(CarTruth truth) noexcept { return truth == CarTruth::Parked ? "parked" : "moving"; }

namespace {

bool on_road(const std::vector<RoadStrip>& roads, int x, int y) {
  for (const auto& r : roads) {
    const int v = r.orientation == Orientation::Horizontal ? y : x;
    if (v >= r.position && v < r.position + r.thickness) return true;
  }
  return false;
}

bool rects_touch(const Rect& a, const Rect& b) {
  // overlap after growing `a` by one pixel on every side
  return a.x - 1 < b.x + b.w && b.x < a.x + a.w + 1 && a.y - 1 < b.y + b.h && b.y < a.y + a.h + 1;
}

void check_spec(const SceneSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw Error(ErrorKind::OutOfBounds, "scene dimensions must be positive");
  for (const auto& r : spec.roads) {
    const int extent = r.orientation == Orientation::Horizontal ? spec.height : spec.width;
    if (r.thickness < 1 || r.position < 0 || r.position + r.thickness > extent)
      throw Error(ErrorKind::OutOfBounds, "road strip outside the scene");
  }
  for (std::size_t i = 0; i < spec.cars.size(); ++i) {
    const Rect& a = spec.cars[i].rect;
    if (a.w < 1 || a.h < 1 || a.x < 0 || a.y < 0 || a.x + a.w > spec.width || a.y + a.h > spec.height)
      throw Error(ErrorKind::OutOfBounds, "car " + std::to_string(i) + " outside the scene");
    for (std::size_t j = 0; j < i; ++j) {
      if (rects_touch(a, spec.cars[j].rect))
        throw Error(ErrorKind::OverlappingCars,
                    "cars " + std::to_string(j) + " and " + std::to_string(i) + " overlap or touch");
    }
  }
  for (std::size_t i = 0; i < spec.cars.size(); ++i) {
    const auto& car = spec.cars[i];
    std::size_t road_pixels = 0;
    for (int y = car.rect.y; y < car.rect.y + car.rect.h; ++y) {
      for (int x = car.rect.x; x < car.rect.x + car.rect.w; ++x) road_pixels += on_road(spec.roads, x, y) ? 1 : 0;
    }
    const auto area = static_cast<std::size_t>(car.rect.w) * static_cast<std::size_t>(car.rect.h);
    if (car.truth == CarTruth::Moving && road_pixels != area)
      throw Error(ErrorKind::InvalidScene, "moving car " + std::to_string(i) + " is not entirely on road");
    if (car.truth == CarTruth::Parked && road_pixels != 0)
      throw Error(ErrorKind::InvalidScene, "parked car " + std::to_string(i) + " overlaps a road");
  }
}

}  // namespace

RenderedScene render(const SceneSpec& spec, const Palette& palette) {
  check_spec(spec);
  const ClassId bg = palette.require(Role::Background);
  const ClassId road = palette.require(Role::Road);
  const ClassId car = palette.require(Role::Car);

  Mask mask(spec.width, spec.height, bg);
  for (const auto& r : spec.roads) {
    if (r.orientation == Orientation::Horizontal) {
      for (int y = r.position; y < r.position + r.thickness; ++y)
        for (int x = 0; x < spec.width; ++x) mask.at(x, y) = road;
    } else {
      for (int y = 0; y < spec.height; ++y)
        for (int x = r.position; x < r.position + r.thickness; ++x) mask.at(x, y) = road;
    }
  }
  for (const auto& c : spec.cars) {
    for (int y = c.rect.y; y < c.rect.y + c.rect.h; ++y)
      for (int x = c.rect.x; x < c.rect.x + c.rect.w; ++x) mask.at(x, y) = car;
  }

  const auto components = connected_components(BinaryMask::of_class(mask, car), Connectivity::Eight);
  RenderedScene out{mask, std::vector<CarTruth>(static_cast<std::size_t>(components.count)), {}};
  for (const auto& c : spec.cars) {
    const std::int32_t id = components.at(c.rect.x, c.rect.y);
    out.car_component.push_back(id);
    out.component_truth[static_cast<std::size_t>(id - 1)] = c.truth;
  }
  return out;
}

bool well_separated(const SceneSpec& spec, int margin) {
  auto in_any_car = [&](int x, int y) {
    return std::any_of(spec.cars.begin(), spec.cars.end(), [&](const SceneCar& c) { return c.rect.contains(x, y); });
  };
  for (const auto& c : spec.cars) {
    const bool want_road = c.truth == CarTruth::Moving;
    for (int y = std::max(0, c.rect.y - margin); y < std::min(spec.height, c.rect.y + c.rect.h + margin); ++y) {
      for (int x = std::max(0, c.rect.x - margin); x < std::min(spec.width, c.rect.x + c.rect.w + margin); ++x) {
        if (in_any_car(x, y)) continue;
        if (on_road(spec.roads, x, y) != want_road) return false;
      }
    }
  }
  return true;
}

namespace {

class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

bool car_fits(const SceneSpec& spec, const SceneCar& car, int margin) {
  for (const auto& other : spec.cars) {
    if (rects_touch(car.rect, other.rect)) return false;
  }
  SceneSpec probe{spec.seed, spec.width, spec.height, spec.roads, spec.cars};
  probe.cars.push_back(car);
  try {
    check_spec(probe);
  } catch (const Error&) {
    return false;
  }
  SceneSpec single{spec.seed, spec.width, spec.height, spec.roads, {car}};
  // Other cars only remove pixels from the neighborhood, so checking the new
  // car alone against the road layout is sufficient.
  return well_separated(single, margin);
}

}  // namespace

SceneSpec generate_random(std::uint64_t seed, const SceneParams& p) {
  if (p.margin < 0 || p.width < 1 || p.height < 1 || p.roads < 0 || p.cars < 0 ||
      !(p.parked_fraction >= 0.0 && p.parked_fraction <= 1.0))
    throw Error(ErrorKind::BadConfig, "invalid scene parameters");

  SceneRng rng(seed);
  const int min_car = 3;
  const int max_car = 10;
  const auto n_parked = static_cast<int>(std::lround(p.parked_fraction * p.cars));

  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    SceneSpec spec;
    spec.seed = seed;
    spec.width = p.width;
    spec.height = p.height;
    for (int i = 0; i < p.roads; ++i) {
      RoadStrip r;
      r.orientation = rng.uniform() < 0.5 ? Orientation::Horizontal : Orientation::Vertical;
      const int extent = r.orientation == Orientation::Horizontal ? p.height : p.width;
      const int lo = std::min(extent, 2 * p.margin + min_car);
      const int hi = std::min(extent, 2 * p.margin + 3 * max_car);
      r.thickness = rng.integer(lo, hi);
      r.position = rng.integer(0, extent - r.thickness);
      spec.roads.push_back(r);
    }

    std::vector<CarTruth> truths(static_cast<std::size_t>(p.cars), CarTruth::Moving);
    std::fill_n(truths.begin(), n_parked, CarTruth::Parked);
    for (int i = p.cars - 1; i > 0; --i) std::swap(truths[static_cast<std::size_t>(i)], truths[static_cast<std::size_t>(rng.integer(0, i))]);

    bool ok = true;
    for (const CarTruth truth : truths) {
      bool placed = false;
      for (int tries = 0; tries < 400 && !placed; ++tries) {
        SceneCar car;
        car.truth = truth;
        car.rect.w = rng.integer(min_car, max_car);
        car.rect.h = rng.integer(min_car, max_car);
        if (car.rect.w > p.width || car.rect.h > p.height) break;
        if (truth == CarTruth::Moving && !spec.roads.empty()) {
          const auto& road = spec.roads[static_cast<std::size_t>(rng.integer(0, p.roads - 1))];
          if (road.orientation == Orientation::Horizontal) {
            car.rect.x = rng.integer(0, p.width - car.rect.w);
            car.rect.y = road.position + rng.integer(0, std::max(0, road.thickness - car.rect.h));
          } else {
            car.rect.y = rng.integer(0, p.height - car.rect.h);
            car.rect.x = road.position + rng.integer(0, std::max(0, road.thickness - car.rect.w));
          }
        } else {
          car.rect.x = rng.integer(0, p.width - car.rect.w);
          car.rect.y = rng.integer(0, p.height - car.rect.h);
        }
        if (car_fits(spec, car, p.margin)) {
          spec.cars.push_back(car);
          placed = true;
        }
      }
      if (!placed) {
        ok = false;
        break;
      }
    }
    if (ok) return spec;
  }
  throw Error(ErrorKind::Infeasible, "no well-separated scene found for seed " + std::to_string(seed) + " after " +
                                         std::to_string(p.max_attempts) + " attempts");
}

SceneScore score_heuristic(const SceneSpec& spec, const Palette& palette, int kernel) {
  const auto scene = render(spec, palette);
  const auto result = detect_parked(scene.mask, palette, ParkedOptions{kernel, std::nullopt});
  const ClassId car = palette.require(Role::Car);

  SceneScore score;
  for (std::size_t i = 0; i < spec.cars.size(); ++i) {
    const Rect& r = spec.cars[i].rect;
    std::size_t still_car = 0;
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) still_car += result.mask.at(x, y) == car ? 1 : 0;
    const auto area = static_cast<std::size_t>(r.w) * static_cast<std::size_t>(r.h);
    CarScore cs{i, spec.cars[i].truth, 2 * still_car >= area ? CarTruth::Moving : CarTruth::Parked};
    if (cs.predicted == CarTruth::Parked) ++score.flagged_parked;
    if (cs.predicted == cs.truth) ++score.correct;
    score.cars.push_back(cs);
  }
  if (!spec.cars.empty())
    score.accuracy = static_cast<double>(score.correct) / static_cast<double>(spec.cars.size());
  return score;
}

SceneSpec parse_scene(std::string_view text) {
  SceneSpec spec;
  try {
    const auto doc = nlohmann::json::parse(text);
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.width = doc.at("width").get<int>();
    spec.height = doc.at("height").get<int>();
    for (const auto& r : doc.value("roads", nlohmann::json::array())) {
      const auto o = r.at("orientation").get<std::string>();
      if (o != "horizontal" && o != "vertical") throw Error(ErrorKind::BadConfig, "unknown orientation '" + o + "'");
      spec.roads.push_back({o == "horizontal" ? Orientation::Horizontal : Orientation::Vertical,
                            r.at("position").get<int>(), r.at("thickness").get<int>()});
    }
    for (const auto& c : doc.value("cars", nlohmann::json::array())) {
      const auto t = c.at("truth").get<std::string>();
      if (t != "parked" && t != "moving") throw Error(ErrorKind::BadConfig, "unknown truth '" + t + "'");
      const auto r = c.at("rect").get<std::vector<int>>();
      if (r.size() != 4) throw Error(ErrorKind::BadConfig, "car rect must be [x, y, w, h]");
      spec.cars.push_back({{r[0], r[1], r[2], r[3]}, t == "parked" ? CarTruth::Parked : CarTruth::Moving});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadConfig, std::string("bad scene document: ") + e.what());
  }
  return spec;
}

std::string to_json(const SceneSpec& spec) {
  nlohmann::json roads = nlohmann::json::array();
  for (const auto& r : spec.roads) {
    roads.push_back({{"orientation", r.orientation == Orientation::Horizontal ? "horizontal" : "vertical"},
                     {"position", r.position},
                     {"thickness", r.thickness}});
  }
  nlohmann::json cars = nlohmann::json::array();
  for (const auto& c : spec.cars) {
    cars.push_back({{"rect", {c.rect.x, c.rect.y, c.rect.w, c.rect.h}}, {"truth", to_string(c.truth)}});
  }
  return nlohmann::json{{"seed", spec.seed}, {"width", spec.width}, {"height", spec.height}, {"roads", roads},
                        {"cars", cars}}
      .dump(2);
}

}  // namespace parkseg
