#include "parkseg/palette.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parkseg/error.hpp"

namespace parkseg {

const char* to_string(Role role) noexcept {
  switch (role) {
    case Role::Background: return "background";
    case Role::Road: return "road";
    case Role::Car: return "car";
    case Role::ParkedCar: return "parked_car";
    case Role::Other: return "other";
  }
  return "other";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
  for (Role r : {Role::Background, Role::Road, Role::Car, Role::ParkedCar, Role::Other}) {
    if (text == to_string(r)) return r;
  }
  return std::nullopt;
}

Palette::Palette(std::vector<PaletteEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorKind::InvalidPalette, "palette has no entries");
  std::sort(entries_.begin(), entries_.end(),
            [](const PaletteEntry& a, const PaletteEntry& b) { return a.id < b.id; });
  index_of_.fill(-1);

  std::set<std::uint32_t> colors;
  std::set<std::string> names;
  int role_count[5] = {0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (index_of_[e.id] >= 0)
      throw Error(ErrorKind::InvalidPalette, "duplicate class id " + std::to_string(e.id));
    index_of_[e.id] = static_cast<int>(i);
    const std::uint32_t packed = (std::uint32_t{e.color.r} << 16) | (std::uint32_t{e.color.g} << 8) | e.color.b;
    if (!colors.insert(packed).second)
      throw Error(ErrorKind::InvalidPalette, "duplicate color for class '" + e.name + "'");
    if (!names.insert(e.name).second)
      throw Error(ErrorKind::InvalidPalette, "duplicate class name '" + e.name + "'");
    ++role_count[static_cast<int>(e.role)];
  }
  if (role_count[static_cast<int>(Role::Background)] != 1)
    throw Error(ErrorKind::InvalidPalette, "exactly one background class required");
  for (Role r : {Role::Road, Role::Car, Role::ParkedCar}) {
    if (role_count[static_cast<int>(r)] > 1)
      throw Error(ErrorKind::InvalidPalette, std::string("more than one class with role ") + to_string(r));
  }
}

Palette Palette::default_four_class() {
  return Palette({
      {0, "background", {0, 0, 0}, Role::Background},
      {1, "road", {200, 162, 200}, Role::Road},
      {2, "car", {0, 0, 255}, Role::Car},
      {3, "parked_car", {255, 255, 0}, Role::ParkedCar},
  });
}

Palette Palette::default_three_class() {
  return Palette({
      {0, "background", {0, 0, 0}, Role::Background},
      {1, "road", {200, 162, 200}, Role::Road},
      {2, "car", {0, 0, 255}, Role::Car},
  });
}

Palette Palette::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidPalette, std::string("palette is not valid JSON: ") + e.what());
  }
  const nlohmann::json* classes = &doc;
  if (doc.is_object() && doc.contains("classes")) classes = &doc["classes"];
  if (!classes->is_object()) throw Error(ErrorKind::InvalidPalette, "expected an object of classes");

  std::vector<PaletteEntry> entries;
  for (const auto& [name, spec] : classes->items()) {
    try {
      PaletteEntry e;
      e.name = name;
      const int id = spec.at("id").get<int>();
      if (id < 0 || id > 255) throw Error(ErrorKind::InvalidPalette, "class id out of range for '" + name + "'");
      e.id = static_cast<ClassId>(id);
      const auto rgb = spec.at("rgb").get<std::vector<int>>();
      if (rgb.size() != 3) throw Error(ErrorKind::InvalidPalette, "rgb must have three components for '" + name + "'");
      for (int c : rgb) {
        if (c < 0 || c > 255) throw Error(ErrorKind::InvalidPalette, "rgb component out of range for '" + name + "'");
      }
      e.color = {static_cast<std::uint8_t>(rgb[0]), static_cast<std::uint8_t>(rgb[1]),
                 static_cast<std::uint8_t>(rgb[2])};
      const auto role_text = spec.value("role", std::string("other"));
      const auto role = parse_role(role_text);
      if (!role) throw Error(ErrorKind::InvalidPalette, "unknown role '" + role_text + "'");
      e.role = *role;
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::InvalidPalette, "bad entry '" + name + "': " + ex.what());
    }
  }
  return Palette(std::move(entries));
}

Palette Palette::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open palette file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string Palette::to_json() const {
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& e : entries_) {
    classes[e.name] = {{"id", e.id}, {"rgb", {e.color.r, e.color.g, e.color.b}}, {"role", to_string(e.role)}};
  }
  return nlohmann::json{{"classes", classes}}.dump(2);
}

std::size_t Palette::index_of(ClassId id) const {
  if (index_of_[id] < 0) throw Error(ErrorKind::UnknownClassId, "class id " + std::to_string(id) + " not in palette");
  return static_cast<std::size_t>(index_of_[id]);
}

const PaletteEntry& Palette::entry(ClassId id) const { return entries_[index_of(id)]; }

const PaletteEntry* Palette::find_name(std::string_view name) const noexcept {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const PaletteEntry* Palette::find_color(Rgb color) const noexcept {
  for (const auto& e : entries_) {
    if (e.color == color) return &e;
  }
  return nullptr;
}

std::optional<ClassId> Palette::id_for(Role role) const noexcept {
  for (const auto& e : entries_) {
    if (e.role == role) return e.id;
  }
  return std::nullopt;
}

ClassId Palette::require(Role role) const {
  if (auto id = id_for(role)) return *id;
  throw Error(ErrorKind::MissingRole, std::string("palette has no ") + to_string(role) + " class");
}

}  // namespace parkseg
