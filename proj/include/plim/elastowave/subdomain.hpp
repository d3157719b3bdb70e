#pragma once

#include <array>
#include <vector>

#include "plim/atlas/sheet.hpp"
#include "plim/elastowave/medium.hpp"
#include "plim/gsolve/gequation.hpp"

namespace plim::elasto {

/// Averaging window of half-width eps around center, with its own fine mesh.
struct SubDomain {
  Medium1D medium;
  double center = 0.0;
  double eps = 0.0;
  GalerkinOps ops;
  Vec psi;       // averaging weights for u and v
  Vec stress_w;  // averaged stress of the window as a dot product with u
  Vec psi_beta;  // beta^T psi, so that psi . (beta u) = psi_beta . u
  double omega_max = 0.0;

  int eta() const { return ops.eta; }
  /// (u_bar, v_bar) of a fine state (u, v).
  Vec coarse_of(const Vec& f) const;
  ProjectionMap projection() const;
};

SubDomain make_subdomain(const Medium1D& medium, double center, double eps, int nodes_per_wavelength, Boundary bc);

/// Invariance residual over (u_bar, v_bar) with 2 eta components
/// (displacements first, then velocities).
GEquation elastowave_geq(const SubDomain& sub, double a_o = 0.0, double a_l = 0.0);

/// One-parameter family of fine initial states through an anchor: the anchor
/// plus a multiple of u_dir (moves u_bar only) or v_dir (moves v_bar only).
struct IcFamily {
  Vec anchor;
  Vec u_dir;
  Vec v_dir;
};

/// Uniform offsets (interior-only for fixed ends), scaled so that psi . dir = 1.
IcFamily ic_family(const SubDomain& sub, Vec anchor);

struct MarchConfig {
  std::array<int, 2> nodes{7, 7};  // odd, so the anchor is the centre node
  int seeds_per_cell = 4;          // characteristics per transverse mesh cell
  double omega_dt = 0.5;           // RK4 time step along characteristics times the largest frequency
  double rate_floor = 0.05;        // time-like rate below this fraction of the anchor rate ends a characteristic
  double spread = 1.5;  // transverse half-width is at least spread * |slope| * time-like half-width
  int timelike = -1;    // forced time-like direction; -1 picks by rate with the other as fallback
};

/// A sheet over a (u_bar, v_bar) rectangle together with its selection key.
struct Manifold {
  Sheet sheet;
  double a_o = 0.0;
  double a_l = 0.0;
  int timelike = 0;  // coarse direction the march advanced along
};

/// Sheet through the family's anchor on the rectangle centred at its coarse
/// point with the given half-widths.
///
/// The coarse direction with the larger rate (relative to the rectangle size)
/// at the anchor is treated as time-like. Fine states on the family line
/// through the anchor are integrated explicitly with the time-like coordinate
/// as parameter, which follows the characteristics of the invariance
/// equation; on each slab of the mesh the transverse nodal values are
/// interpolated between the characteristics. Nodes no characteristic reaches,
/// or reached only after the time-like rate collapses or changes sign, are
/// pruned. A fine equilibrium anchor gives the constant sheet.
Manifold solve_subdomain_manifold(const SubDomain& sub, const IcFamily& family, std::array<double, 2> half_width,
                                  double a_o, double a_l, const MarchConfig& config, FlopCounter* flops = nullptr);

/// (u_bar', v_bar') on the manifold. Throws OutOfDomain / PrunedRegion.
Vec coarse_subdomain_rhs(const SubDomain& sub, const Manifold& m, const Vec& c, FlopCounter* flops = nullptr);

/// Fine state on the manifold at c.
Vec lift(const Manifold& m, const Vec& c, FlopCounter* flops = nullptr);

/// Squared invariance residual integrated over the unpruned part of the sheet.
double manifold_residual(const SubDomain& sub, const Manifold& m);

struct SubdomainRunConfig {
  double dt = 1e-2;
  double horizon = 1.0;
  std::array<double, 2> half_width{1e-6, 1e-6};  // lower bounds
  double window = 2e-2;  // half-widths also cover window * |coarse rate at the anchor|
  MarchConfig march;
  double a_o = 0.0;
  double a_l = 0.0;
};

struct SubdomainRun {
  std::vector<double> t;
  std::vector<Vec> coarse;
  std::vector<double> transfer_t;
  std::size_t sheets_solved = 0;
};

/// Rectangle half-widths for a sheet anchored at the fine state f.
std::array<double, 2> sheet_half_width(const SubDomain& sub, const Vec& f, double a_o, double a_l,
                                       std::array<double, 2> lower, double window);

/// Coarse evolution of one sub-domain. A new sheet is marched from the lifted
/// state whenever the trajectory leaves the current one.
SubdomainRun evolve_subdomain(const SubDomain& sub, const Vec& f0, const SubdomainRunConfig& config,
                              FlopCounter* flops = nullptr);

}  // namespace plim::elasto
