#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parkseg/mask.hpp"
#include "parkseg/palette.hpp"

namespace parkseg {

enum class Orientation { Horizontal, Vertical };

/// Full-length strip: rows [position, position + thickness) when horizontal,
/// columns when vertical.
struct RoadStrip {
  Orientation orientation = Orientation::Horizontal;
  int position = 0;
  int thickness = 1;
  friend bool operator==(const RoadStrip&, const RoadStrip&) = default;
};

struct Rect {
  int x = 0, y = 0, w = 1, h = 1;
  bool contains(int px, int py) const { return px >= x && py >= y && px < x + w && py < y + h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

enum class CarTruth { Moving, Parked };

const char* to_string(CarTruth truth) noexcept;

struct SceneCar {
  Rect rect;
  CarTruth truth = CarTruth::Moving;
  friend bool operator==(const SceneCar&, const SceneCar&) = default;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int width = 1;
  int height = 1;
  std::vector<RoadStrip> roads;
  std::vector<SceneCar> cars;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct RenderedScene {
  Mask mask;
  /// truth[k - 1] is the ground truth of car component k (8-connected,
  /// raster-ordered ids as produced by connected_components).
  std::vector<CarTruth> component_truth;
  /// component id of each car of the spec, in spec order.
  std::vector<std::int32_t> car_component;
};

/// Background, then road strips, then cars. Throws OutOfBounds,
/// OverlappingCars (overlapping or 8-adjacent rects, which would merge into
/// one component) and InvalidScene (a moving car not fully on road, or a
/// parked car overlapping road).
RenderedScene render(const SceneSpec& spec, const Palette& palette);

struct SceneParams {
  int width = 128;
  int height = 128;
  int roads = 2;
  int cars = 6;
  double parked_fraction = 0.5;
  int margin = 7;
  int max_attempts = 200;
};

/// Rejection-samples a scene in which every car is well separated: each
/// non-car pixel within Chebyshev distance `margin` of a car is road for
/// moving cars and background for parked cars. Throws Infeasible.
SceneSpec generate_random(std::uint64_t seed, const SceneParams& params);

/// Exhaustive check of the well-separated property.
bool well_separated(const SceneSpec& spec, int margin);

struct CarScore {
  std::size_t car_index = 0;
  CarTruth truth = CarTruth::Moving;
  CarTruth predicted = CarTruth::Moving;
};

struct SceneScore {
  /// nullopt when the scene has no cars.
  std::optional<double> accuracy;
  std::size_t correct = 0;
  std::size_t flagged_parked = 0;
  std::vector<CarScore> cars;
};

/// Renders the scene, runs detect_parked and compares each car's predicted
/// class (majority label over its rect in the output) with its truth.
SceneScore score_heuristic(const SceneSpec& spec, const Palette& palette, int kernel);

SceneSpec parse_scene(std::string_view json);
std::string to_json(const SceneSpec& spec);

}  // namespace parkseg
