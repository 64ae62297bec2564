#include "parkseg/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "parkseg/error.hpp"
#include "parkseg/png_codec.hpp"

namespace parkseg {

namespace fs = std::filesystem;

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "train";
}

const char* to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::DuplicateAcrossSplits: return "DuplicateAcrossSplits";
    case ViolationKind::MissingImage: return "MissingImage";
    case ViolationKind::MissingMask: return "MissingMask";
    case ViolationKind::UndecodableMask: return "UndecodableMask";
  }
  return "Unknown";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  std::vector<ManifestEntry> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(trim(f));
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
      throw Error(ErrorKind::BadConfig, "manifest line " + std::to_string(line_no) +
                                            ": expected image_path,mask_path,split");

    ManifestEntry e;
    e.image_path = fields[0];
    e.mask_path = fields[1];
    e.line = line_no;
    if (fields[2] == "train") e.split = Split::Train;
    else if (fields[2] == "valid") e.split = Split::Valid;
    else if (fields[2] == "test") e.split = Split::Test;
    else
      throw Error(ErrorKind::BadConfig, "manifest line " + std::to_string(line_no) + ": unknown split '" +
                                            fields[2] + "'");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open manifest " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::vector<ManifestViolation> validate_manifest(const std::vector<ManifestEntry>& entries,
                                                 const ManifestCheck& check) {
  std::vector<ManifestViolation> out;
  std::map<std::string, Split> first_split;
  const fs::path base(check.base_dir);

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    auto [it, inserted] = first_split.emplace(e.image_path, e.split);
    if (!inserted && it->second != e.split) {
      out.push_back({ViolationKind::DuplicateAcrossSplits, i,
                     e.image_path + " appears in both " + to_string(it->second) + " and " + to_string(e.split)});
    }

    const fs::path image = base / e.image_path;
    const fs::path mask = base / e.mask_path;
    if (!fs::is_regular_file(image)) out.push_back({ViolationKind::MissingImage, i, image.string()});
    if (!fs::is_regular_file(mask)) {
      out.push_back({ViolationKind::MissingMask, i, mask.string()});
      continue;
    }
    if (check.palette == nullptr) continue;
    try {
      decode_mask(read_file(mask.string()), *check.palette, check.tolerance);
    } catch (const Error& err) {
      out.push_back({ViolationKind::UndecodableMask, i, mask.string() + ": " + err.what()});
    }
  }
  return out;
}

}  // namespace parkseg
