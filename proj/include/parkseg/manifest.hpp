#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "parkseg/palette.hpp"

namespace parkseg {

enum class Split { Train, Valid, Test };

const char* to_string(Split split) noexcept;

struct ManifestEntry {
  std::string image_path;
  std::string mask_path;
  Split split = Split::Train;
  int line = 0;  // 1-based source line, 0 when built in code
};

/// One record per line: `image_path,mask_path,split`. Blank lines and lines
/// starting with '#' are skipped. Throws BadConfig on a malformed record.
std::vector<ManifestEntry> parse_manifest(std::string_view text);
std::vector<ManifestEntry> load_manifest(const std::string& path);

enum class ViolationKind { DuplicateAcrossSplits, MissingImage, MissingMask, UndecodableMask };

const char* to_string(ViolationKind kind) noexcept;

struct ManifestViolation {
  ViolationKind kind;
  std::size_t entry_index;
  std::string detail;
};

struct ManifestCheck {
  const Palette* palette = nullptr;
  int tolerance = 0;
  /// Relative paths in entries are resolved against this directory.
  std::string base_dir = ".";
};

/// Empty result iff splits are disjoint, every referenced file exists and
/// every mask decodes under the palette. Violations are ordered by entry.
std::vector<ManifestViolation> validate_manifest(const std::vector<ManifestEntry>& entries,
                                                 const ManifestCheck& check);

}  // namespace parkseg
