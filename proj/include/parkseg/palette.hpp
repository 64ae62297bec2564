#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parkseg {

using ClassId = std::uint8_t;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class Role { Background, Road, Car, ParkedCar, Other };

const char* to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view text) noexcept;

struct PaletteEntry {
  ClassId id = 0;
  std::string name;
  Rgb color;
  Role role = Role::Other;
};

/// Bijection between class ids and RGB colors, tagged with the semantic role
/// each class plays in parked-car detection and evaluation.
///
/// Construction validates: ids and colors distinct, exactly one background,
/// at most one road, car and parked_car. Entries are kept sorted by id, and
/// the position of an entry in that order is its dense class index (used by
/// confusion matrices and probability maps).
class Palette {
 public:
  explicit Palette(std::vector<PaletteEntry> entries);

  /// background=(0,0,0), road=(200,162,200), car=(0,0,255),
  /// parked_car=(255,255,0) with ids 0..3.
  static Palette default_four_class();
  /// Same as default_four_class() without the parked_car entry.
  static Palette default_three_class();

  /// Parses `{"classes": {"<name>": {"id": N, "rgb": [r,g,b], "role": "..."}}}`.
  static Palette from_json(std::string_view text);
  static Palette load(const std::string& path);
  std::string to_json() const;

  const std::vector<PaletteEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  bool contains(ClassId id) const noexcept { return index_of_[id] >= 0; }
  /// Dense index of `id`; throws UnknownClassId.
  std::size_t index_of(ClassId id) const;
  const PaletteEntry& entry(ClassId id) const;
  const PaletteEntry* find_name(std::string_view name) const noexcept;
  const PaletteEntry* find_color(Rgb color) const noexcept;
  std::optional<ClassId> id_for(Role role) const noexcept;
  /// Throws MissingRole when absent.
  ClassId require(Role role) const;
  ClassId background() const { return require(Role::Background); }

 private:
  std::vector<PaletteEntry> entries_;
  std::array<int, 256> index_of_{};
};

}  // namespace parkseg
