#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "plim/atlas/sheet.hpp"
#include "plim/gsolve/lsfem.hpp"

namespace plim {

/// Parameters describing how an atlas is laid out and generated.
struct AtlasSpec {
  enum class Corners { All, LowerLeft };

  std::string system;
  std::string projection;  // human-readable descriptor
  int dim = 1;             // coarse dimension
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<double, 2> block_size{1.0, 1.0};
  std::array<int, 2> nodes{6, 6};  // mesh nodes per block side
  Corners corners = Corners::All;
  std::vector<Vec> anchor_data;    // eliminated values imposed at each chosen corner
  GSolveConfig gsolve;

  void validate() const;
  std::array<int, 2> block_count() const;
  std::size_t total_blocks() const { return static_cast<std::size_t>(block_count()[0] * block_count()[1]); }
  BlockGeometry geometry(BlockIndex b) const;
  /// Anchor coarse points of a block in generation order.
  std::vector<Vec> anchor_points(BlockIndex b) const;
  std::size_t sheets_per_block() const;
  bool contains(const Vec& c, double tol = 0.0) const;
};

/// Block-indexed collection of sheets.
///
/// Concurrent readers are safe; add_sheet needs exclusive access.
class Atlas {
 public:
  Atlas() = default;
  explicit Atlas(AtlasSpec spec);

  const AtlasSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }

  /// Containing block; points on shared faces go to the larger lattice index.
  BlockIndex block_of(const Vec& c) const;
  bool in_domain(const Vec& c) const { return spec_.contains(c); }
  BlockGeometry geometry(BlockIndex b) const { return spec_.geometry(b); }
  bool valid_block(BlockIndex b) const;
  std::vector<BlockIndex> all_blocks() const;

  /// Stores the sheet under the next free id (the sheet's own id is ignored
  /// unless keep_id is set) and returns the id.
  SheetId add_sheet(Sheet sheet, bool keep_id = false);
  bool has_sheet(SheetId id) const { return index_.count(id) != 0; }
  /// Throws MissingSheet.
  const Sheet& sheet(SheetId id) const;
  const std::vector<SheetId>& sheets_in(BlockIndex b) const;
  const std::vector<Sheet>& sheets() const { return sheets_; }
  std::size_t size() const { return sheets_.size(); }

  bool operator==(const Atlas& other) const;

 private:
  AtlasSpec spec_;
  std::vector<Sheet> sheets_;
  std::unordered_map<SheetId, std::size_t> index_;
  std::map<BlockIndex, std::vector<SheetId>> by_block_;
  SheetId next_id_ = 0;
};

struct Selection {
  SheetId id = kNoSheet;
  double distance = 0.0;
};

/// Nearest sheet of the block to the fine datum f, measured on the
/// eliminated coordinates. Sheets undefined at Pi(f) and degenerate sheets
/// are skipped. Near-ties (within tie_tol) prefer the sheet whose coarse rate
/// at Pi(f) best aligns with Pi(hint); remaining ties go to the lower id.
/// Throws NoCandidate when nothing qualifies.
Selection select_sheet(const Atlas& atlas, BlockIndex block, const Vec& f, const FineSystem& sys,
                       const ProjectionMap& proj, const Vec* hint = nullptr, double tie_tol = 1e-9);

/// Same, returning nullopt instead of throwing.
std::optional<Selection> try_select_sheet(const Atlas& atlas, BlockIndex block, const Vec& f,
                                          const FineSystem& sys, const ProjectionMap& proj,
                                          const Vec* hint = nullptr, double tie_tol = 1e-9);

/// True when the block holds at least one non-degenerate sheet.
bool has_candidates(const Atlas& atlas, BlockIndex block);

struct EnsureResult {
  Selection selection;
  bool solved = false;  // a supplemental sheet was added
};

/// Returns the nearest existing sheet when within threshold, otherwise
/// solves a sheet anchored at (Pi(f), eliminated part of f) and inserts it.
EnsureResult ensure_sheet(Atlas& atlas, BlockIndex block, const Vec& f, const FineSystem& sys,
                          const ProjectionMap& proj, const GEquation& geq, const GSolveConfig& config,
                          double supplement_threshold = 0.5, double tie_tol = 1e-9);

}  // namespace plim
