#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "plim/atlas/atlas.hpp"

namespace plim {

inline constexpr std::uint32_t kAtlasFormatVersion = 1;

/// Binary container: "PLIM", u32 version, u64 payload size, payload,
/// u64 FNV-1a checksum of the payload. Numbers are little-endian.
void save_atlas(const Atlas& atlas, const std::string& path);
void write_atlas(const Atlas& atlas, std::ostream& out);

/// Reads either the binary container or the text export. Throws CorruptFile
/// or VersionMismatch.
Atlas load_atlas(const std::string& path);
Atlas read_atlas(std::istream& in);

/// Plain-text (JSON) export; see docs/atlas-format.md.
void export_atlas_text(const Atlas& atlas, std::ostream& out);
Atlas import_atlas_text(std::istream& in);

}  // namespace plim
