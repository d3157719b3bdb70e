#include "plim/atlas/sheet.hpp"

#include <algorithm>
#include <cmath>

namespace plim {

void BlockGeometry::validate() const {
  require(dim == 1 || dim == 2, "block: dimension must be 1 or 2");
  for (int d = 0; d < dim; ++d) {
    require(hi[d] > lo[d], "block: bounds must be non-degenerate");
    require(nodes[d] >= 2, "block: need at least 2 nodes per side");
  }
}

Vec BlockGeometry::node_coords(int node) const {
  Vec c(dim);
  const int i = node % nodes[0];
  c[0] = lo[0] + i * spacing(0);
  if (dim == 2) c[1] = lo[1] + (node / nodes[0]) * spacing(1);
  return c;
}

bool BlockGeometry::contains(const Vec& c, double tol) const {
  for (int d = 0; d < dim; ++d) {
    const double pad = tol * (hi[d] - lo[d]);
    if (c[d] < lo[d] - pad || c[d] > hi[d] + pad) return false;
  }
  return true;
}

std::optional<int> BlockGeometry::node_at(const Vec& c, double tol) const {
  std::array<int, 2> idx{0, 0};
  for (int d = 0; d < dim; ++d) {
    const double s = (c[d] - lo[d]) / spacing(d);
    const double r = std::round(s);
    if (std::abs(s - r) > tol || r < 0 || r > nodes[d] - 1) return std::nullopt;
    idx[d] = static_cast<int>(r);
  }
  return node_id(idx[0], idx[1]);
}

Vec BlockGeometry::clamp(const Vec& c) const {
  Vec out = c;
  for (int d = 0; d < dim; ++d) out[d] = std::clamp(c[d], lo[d], hi[d]);
  return out;
}

std::size_t Sheet::pruned_count() const {
  return static_cast<std::size_t>(std::count_if(pruned.begin(), pruned.end(), [](auto p) { return p != 0; }));
}

namespace {

// Element indices along one axis whose closed interval holds x.
int candidates_1d(const BlockGeometry& g, int d, double x, std::array<int, 2>& out, std::array<double, 2>& xi) {
  const int ne = g.nodes[d] - 1;
  const double h = g.spacing(d);
  double s = (x - g.lo[d]) / h;
  // Snap to mesh nodes so nodal values are returned exactly.
  if (std::abs(s - std::round(s)) < 1e-12 * std::max(1.0, std::abs(s))) s = std::round(s);
  int e = static_cast<int>(std::floor(s));
  e = std::clamp(e, 0, ne - 1);
  int n = 0;
  out[n] = e;
  xi[n] = s - e;
  ++n;
  // On an interior element boundary the left neighbour also holds x.
  const double local = s - e;
  if (local <= 1e-12 && e > 0) {
    out[n] = e - 1;
    xi[n] = s - (e - 1);
    ++n;
  } else if (local >= 1.0 - 1e-12 && e < ne - 1) {
    out[n] = e + 1;
    xi[n] = s - (e + 1);
    ++n;
  }
  return n;
}

}  // namespace

std::optional<ElementHit> locate(const Sheet& sheet, const Vec& c) {
  const BlockGeometry& g = sheet.geom;
  std::array<int, 2> ex{}, ey{};
  std::array<double, 2> xx{}, xy{};
  const int nx = candidates_1d(g, 0, c[0], ex, xx);
  const int ny = g.dim == 2 ? candidates_1d(g, 1, c[1], ey, xy) : 1;
  const double hx = g.spacing(0);
  const double hy = g.dim == 2 ? g.spacing(1) : 1.0;

  for (int b = 0; b < ny; ++b) {
    for (int a = 0; a < nx; ++a) {
      ElementHit hit;
      const double u = xx[a];
      if (g.dim == 1) {
        hit.count = 2;
        hit.node = {ex[a], ex[a] + 1, 0, 0};
        hit.weight = {1.0 - u, u, 0.0, 0.0};
        hit.dweight[0] = {-1.0 / hx, 0.0};
        hit.dweight[1] = {1.0 / hx, 0.0};
      } else {
        const double v = xy[b];
        const int i = ex[a], j = ey[b];
        hit.count = 4;
        hit.node = {g.node_id(i, j), g.node_id(i + 1, j), g.node_id(i + 1, j + 1), g.node_id(i, j + 1)};
        hit.weight = {(1 - u) * (1 - v), u * (1 - v), u * v, (1 - u) * v};
        hit.dweight[0] = {-(1 - v) / hx, -(1 - u) / hy};
        hit.dweight[1] = {(1 - v) / hx, -u / hy};
        hit.dweight[2] = {v / hx, u / hy};
        hit.dweight[3] = {-v / hx, (1 - u) / hy};
      }
      bool ok = true;
      for (int q = 0; q < hit.count; ++q) ok = ok && !sheet.node_pruned(hit.node[q]);
      if (ok) return hit;
    }
  }
  return std::nullopt;
}

bool Sheet::defined_at(const Vec& c) const {
  if (degenerate || !geom.contains(c, 1e-12)) return false;
  return locate(*this, c).has_value();
}

namespace {

ElementHit checked_hit(const Sheet& sheet, const Vec& c) {
  require(c.size() == sheet.geom.dim, "sheet: coarse dimension mismatch");
  if (!sheet.geom.contains(c, 1e-12)) throw Error(ErrorKind::OutOfDomain, "point outside sheet block");
  auto hit = locate(sheet, c);
  if (!hit || sheet.degenerate) throw Error(ErrorKind::PrunedRegion, "sheet undefined at point");
  return *hit;
}

}  // namespace

Vec sheet_eval(const Sheet& sheet, const Vec& c) {
  const ElementHit hit = checked_hit(sheet, c);
  Vec out = Vec::Zero(sheet.n_components);
  for (int q = 0; q < hit.count; ++q) {
    const double* v = sheet.values.data() + static_cast<std::ptrdiff_t>(hit.node[q]) * sheet.n_components;
    for (int k = 0; k < sheet.n_components; ++k) out[k] += hit.weight[q] * v[k];
  }
  return out;
}

Mat sheet_grad(const Sheet& sheet, const Vec& c) {
  const ElementHit hit = checked_hit(sheet, c);
  const int dim = sheet.geom.dim;
  Mat out = Mat::Zero(sheet.n_components, dim);
  for (int q = 0; q < hit.count; ++q) {
    const double* v = sheet.values.data() + static_cast<std::ptrdiff_t>(hit.node[q]) * sheet.n_components;
    for (int k = 0; k < sheet.n_components; ++k) {
      for (int d = 0; d < dim; ++d) out(k, d) += hit.dweight[q][d] * v[k];
    }
  }
  return out;
}

}  // namespace plim
