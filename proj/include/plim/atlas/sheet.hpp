#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "plim/core/fine_system.hpp"

namespace plim {

/// Lattice coordinates of a coarse block (second entry unused in 1-D).
struct BlockIndex {
  std::array<int, 2> ij{0, 0};
  auto operator<=>(const BlockIndex&) const = default;
};

/// Axis-aligned coarse cell carrying a uniform tensor-product mesh of
/// linear (1-D) or bilinear (2-D) elements.
struct BlockGeometry {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<int, 2> nodes{2, 1};

  void validate() const;
  int node_count() const { return nodes[0] * (dim == 2 ? nodes[1] : 1); }
  int element_count() const { return (nodes[0] - 1) * (dim == 2 ? nodes[1] - 1 : 1); }
  double spacing(int d) const { return (hi[d] - lo[d]) / (nodes[d] - 1); }
  double measure() const { return (hi[0] - lo[0]) * (dim == 2 ? hi[1] - lo[1] : 1.0); }
  int node_id(int i, int j = 0) const { return i + nodes[0] * j; }
  Vec node_coords(int node) const;
  bool contains(const Vec& c, double tol = 0.0) const;
  /// Node index when c sits on a mesh node (within tol relative to spacing).
  std::optional<int> node_at(const Vec& c, double tol = 1e-12) const;
  /// Nearest point of the closed block.
  Vec clamp(const Vec& c) const;

  bool operator==(const BlockGeometry&) const = default;
};

using SheetId = std::int64_t;
inline constexpr SheetId kNoSheet = -1;

struct Anchor {
  Vec coarse;  // point in the block
  Vec data;    // imposed sheet values there
};

/// One locally invariant manifold over one block, stored as nodal values of
/// its finite-element interpolant.
struct Sheet {
  SheetId id = kNoSheet;
  BlockIndex block;
  BlockGeometry geom;
  int n_components = 1;
  std::vector<double> values;        // node-major: values[node * n_components + k]
  std::vector<double> imag;          // imaginary parts from a complex solve, else empty
  std::vector<std::uint8_t> pruned;  // per node; empty means nothing pruned
  Anchor anchor;
  double objective = 0.0;
  bool degenerate = false;  // every node pruned: kept for diagnostics only

  double value(int node, int k) const { return values[static_cast<std::size_t>(node * n_components + k)]; }
  bool node_pruned(int node) const { return !pruned.empty() && pruned[static_cast<std::size_t>(node)] != 0; }
  std::size_t pruned_count() const;
  /// True when some element containing c has no pruned node.
  bool defined_at(const Vec& c) const;
};

/// Bilinear (or linear) interpolation of the nodal values at c.
/// Throws OutOfDomain outside the block and PrunedRegion when every element
/// containing c touches a pruned node.
Vec sheet_eval(const Sheet& sheet, const Vec& c);

/// Gradient of the interpolant: rows are components, columns coarse directions.
Mat sheet_grad(const Sheet& sheet, const Vec& c);

/// Shape data of the element used to evaluate a sheet at a point.
struct ElementHit {
  std::array<int, 4> node{};
  std::array<double, 4> weight{};
  std::array<std::array<double, 2>, 4> dweight{};
  int count = 0;
};

/// Locates the element holding c, preferring the lower-left candidate whose
/// nodes are all unpruned. Empty when no candidate is usable.
std::optional<ElementHit> locate(const Sheet& sheet, const Vec& c);

}  // namespace plim
