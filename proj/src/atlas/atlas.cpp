#include "plim/atlas/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plim/core/lift.hpp"

namespace plim {

void AtlasSpec::validate() const {
  require(dim == 1 || dim == 2, "atlas: coarse dimension must be 1 or 2");
  for (int d = 0; d < dim; ++d) {
    require(hi[d] > lo[d], "atlas: empty domain");
    require(block_size[d] > 0.0, "atlas: block size must be positive");
    require(nodes[d] >= 2, "atlas: need at least 2 mesh nodes per side");
    const double n = (hi[d] - lo[d]) / block_size[d];
    require(std::abs(n - std::round(n)) < 1e-9 * std::max(1.0, n), "atlas: blocks must tile the domain");
  }
}

std::array<int, 2> AtlasSpec::block_count() const {
  std::array<int, 2> n{1, 1};
  for (int d = 0; d < dim; ++d) n[d] = static_cast<int>(std::lround((hi[d] - lo[d]) / block_size[d]));
  return n;
}

BlockGeometry AtlasSpec::geometry(BlockIndex b) const {
  BlockGeometry g;
  g.dim = dim;
  for (int d = 0; d < dim; ++d) {
    g.lo[d] = lo[d] + b.ij[d] * block_size[d];
    g.hi[d] = b.ij[d] + 1 == block_count()[d] ? hi[d] : lo[d] + (b.ij[d] + 1) * block_size[d];
    g.nodes[d] = nodes[d];
  }
  if (dim == 1) g.nodes[1] = 1;
  return g;
}

std::vector<Vec> AtlasSpec::anchor_points(BlockIndex b) const {
  const BlockGeometry g = geometry(b);
  std::vector<Vec> pts;
  if (dim == 1) {
    pts.push_back(Vec{{g.lo[0]}});
    if (corners == Corners::All) pts.push_back(Vec{{g.hi[0]}});
  } else {
    pts.push_back(Vec{{g.lo[0], g.lo[1]}});
    if (corners == Corners::All) {
      pts.push_back(Vec{{g.hi[0], g.lo[1]}});
      pts.push_back(Vec{{g.hi[0], g.hi[1]}});
      pts.push_back(Vec{{g.lo[0], g.hi[1]}});
    }
  }
  return pts;
}

std::size_t AtlasSpec::sheets_per_block() const {
  const std::size_t corners_n = corners == Corners::LowerLeft ? 1 : (dim == 1 ? 2 : 4);
  return corners_n * anchor_data.size();
}

bool AtlasSpec::contains(const Vec& c, double tol) const {
  for (int d = 0; d < dim; ++d) {
    if (c[d] < lo[d] - tol || c[d] > hi[d] + tol) return false;
  }
  return true;
}

Atlas::Atlas(AtlasSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

BlockIndex Atlas::block_of(const Vec& c) const {
  require(c.size() == spec_.dim, "block_of: coarse dimension mismatch");
  if (!c.allFinite() || !spec_.contains(c)) throw Error(ErrorKind::OutOfDomain, "coarse point outside atlas domain");
  const auto n = spec_.block_count();
  BlockIndex b;
  for (int d = 0; d < spec_.dim; ++d) {
    const int i = static_cast<int>(std::floor((c[d] - spec_.lo[d]) / spec_.block_size[d]));
    b.ij[d] = std::clamp(i, 0, n[d] - 1);
  }
  return b;
}

bool Atlas::valid_block(BlockIndex b) const {
  const auto n = spec_.block_count();
  for (int d = 0; d < 2; ++d) {
    if (b.ij[d] < 0 || b.ij[d] >= n[d]) return false;
  }
  return true;
}

std::vector<BlockIndex> Atlas::all_blocks() const {
  const auto n = spec_.block_count();
  std::vector<BlockIndex> out;
  for (int j = 0; j < n[1]; ++j) {
    for (int i = 0; i < n[0]; ++i) out.push_back(BlockIndex{{i, j}});
  }
  return out;
}

SheetId Atlas::add_sheet(Sheet sheet, bool keep_id) {
  require(valid_block(sheet.block), "add_sheet: block outside atlas");
  require(sheet.geom == geometry(sheet.block), "add_sheet: sheet mesh does not match its block");
  if (!keep_id) sheet.id = next_id_;
  require(sheet.id >= 0 && !has_sheet(sheet.id), "add_sheet: duplicate or invalid sheet id");
  next_id_ = std::max(next_id_, sheet.id + 1);
  const SheetId id = sheet.id;
  by_block_[sheet.block].push_back(id);
  index_[id] = sheets_.size();
  sheets_.push_back(std::move(sheet));
  return id;
}

const Sheet& Atlas::sheet(SheetId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::MissingSheet, "no sheet with id " + std::to_string(id));
  return sheets_[it->second];
}

const std::vector<SheetId>& Atlas::sheets_in(BlockIndex b) const {
  static const std::vector<SheetId> none;
  const auto it = by_block_.find(b);
  return it == by_block_.end() ? none : it->second;
}

namespace {

bool sheet_equal(const Sheet& a, const Sheet& b) {
  return a.id == b.id && a.block == b.block && a.geom == b.geom && a.n_components == b.n_components &&
         a.values == b.values && a.imag == b.imag && a.pruned == b.pruned && a.anchor.coarse == b.anchor.coarse &&
         a.anchor.data == b.anchor.data && a.objective == b.objective && a.degenerate == b.degenerate;
}

bool spec_equal(const AtlasSpec& a, const AtlasSpec& b) {
  if (a.anchor_data.size() != b.anchor_data.size()) return false;
  for (std::size_t i = 0; i < a.anchor_data.size(); ++i) {
    if (a.anchor_data[i] != b.anchor_data[i]) return false;
  }
  return a.system == b.system && a.projection == b.projection && a.dim == b.dim && a.lo == b.lo && a.hi == b.hi &&
         a.block_size == b.block_size && a.nodes == b.nodes && a.corners == b.corners &&
         a.gsolve.mode == b.gsolve.mode && a.gsolve.gauss == b.gsolve.gauss &&
         a.gsolve.accept_threshold == b.gsolve.accept_threshold &&
         a.gsolve.w_anchor_scale == b.gsolve.w_anchor_scale && a.gsolve.prune_tol == b.gsolve.prune_tol;
}

}  // namespace

bool Atlas::operator==(const Atlas& other) const {
  if (!spec_equal(spec_, other.spec_) || sheets_.size() != other.sheets_.size()) return false;
  for (std::size_t i = 0; i < sheets_.size(); ++i) {
    if (!sheet_equal(sheets_[i], other.sheets_[i])) return false;
  }
  return true;
}

bool has_candidates(const Atlas& atlas, BlockIndex block) {
  for (SheetId id : atlas.sheets_in(block)) {
    if (!atlas.sheet(id).degenerate) return true;
  }
  return false;
}

std::optional<Selection> try_select_sheet(const Atlas& atlas, BlockIndex block, const Vec& f, const FineSystem& sys,
                                          const ProjectionMap& proj, const Vec* hint, double tie_tol) {
  const Vec c = proj.project(f);
  const Vec target = proj.eliminated_part(f);
  struct Candidate {
    SheetId id;
    double distance;
  };
  std::vector<Candidate> cands;
  for (SheetId id : atlas.sheets_in(block)) {
    const Sheet& s = atlas.sheet(id);
    if (s.degenerate || !s.geom.contains(c, 1e-12) || !s.defined_at(c)) continue;
    cands.push_back({id, (sheet_eval(s, c) - target).norm()});
  }
  if (cands.empty()) return std::nullopt;

  double best = std::numeric_limits<double>::infinity();
  for (const auto& k : cands) best = std::min(best, k.distance);
  std::vector<Candidate> near;
  for (const auto& k : cands) {
    if (k.distance - best < tie_tol) near.push_back(k);
  }
  std::sort(near.begin(), near.end(), [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
  Candidate pick = near.front();
  if (hint && near.size() > 1) {
    const Vec dir = proj.rate(*hint);
    double best_dot = -std::numeric_limits<double>::infinity();
    for (const auto& k : near) {
      const double dot = coarse_rhs(sys, proj, atlas.sheet(k.id), c).dot(dir);
      if (dot > best_dot) {
        best_dot = dot;
        pick = k;
      }
    }
  }
  return Selection{pick.id, pick.distance};
}

Selection select_sheet(const Atlas& atlas, BlockIndex block, const Vec& f, const FineSystem& sys,
                       const ProjectionMap& proj, const Vec* hint, double tie_tol) {
  auto sel = try_select_sheet(atlas, block, f, sys, proj, hint, tie_tol);
  if (!sel) {
    throw Error(ErrorKind::NoCandidate, "no usable sheet in block (" + std::to_string(block.ij[0]) + "," +
                                            std::to_string(block.ij[1]) + ")");
  }
  return *sel;
}

EnsureResult ensure_sheet(Atlas& atlas, BlockIndex block, const Vec& f, const FineSystem& sys,
                          const ProjectionMap& proj, const GEquation& geq, const GSolveConfig& config,
                          double supplement_threshold, double tie_tol) {
  const Vec hint = sys(f);
  if (auto sel = try_select_sheet(atlas, block, f, sys, proj, &hint, tie_tol)) {
    if (sel->distance <= supplement_threshold) return {*sel, false};
  }
  const BlockGeometry geom = atlas.geometry(block);
  const Vec c = geom.clamp(proj.project(f));
  LsfemProblem problem(block, geom, geq, Anchor{c, proj.eliminated_part(f)}, config.mode, config.gauss,
                       config.w_anchor_scale * geom.measure());
  Sheet s = solve_sheet(problem, config);
  const SheetId id = atlas.add_sheet(std::move(s));
  const Sheet& added = atlas.sheet(id);
  const double distance = added.defined_at(c) ? (sheet_eval(added, c) - proj.eliminated_part(f)).norm()
                                              : std::numeric_limits<double>::infinity();
  return {Selection{id, distance}, true};
}

}  // namespace plim
