#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "plim/elastowave/medium.hpp"
#include "plim/elastowave/subdomain.hpp"
#include "plim/parallel/omp.hpp"

namespace plim::elasto {

/// Uniform mesh of quadratic elements on [0, length], two Gauss points per
/// element.
struct CoarseMesh {
  struct GaussPoint {
    double x = 0.0;
    double weight = 0.0;  // includes the Jacobian
    int element = 0;
    double xi = 0.0;  // reference coordinate in [-1, 1]
  };

  int elements = 0;
  double length = 1.0;
  Mat M;                 // consistent mass, rho included
  Mat interior_inverse;  // inverse of M restricted to the interior nodes
  std::vector<GaussPoint> gauss;

  int nodes() const { return 2 * elements + 1; }
  double h() const { return length / elements; }
  double x(int i) const { return 0.5 * h() * i; }
};

CoarseMesh quadratic_mesh(double length, int elements, double rho);

/// Interpolated coarse fields and their slopes at a Gauss point.
struct GaussValues {
  double u = 0.0;
  double v = 0.0;
  double u_x = 0.0;
  double v_x = 0.0;
};

GaussValues gauss_values(const CoarseMesh& mesh, const Vec& u, const Vec& v, int g);

/// Sheets of one sub-domain keyed by their quantized end accelerations.
struct ManifoldStore {
  double spacing = 0.5;  // lattice spacing of the (a_o, a_l) keys
  std::vector<Manifold> items;

  std::array<double, 2> key_of(double a_o, double a_l) const;
};

struct GaussSelection {
  EndValues ends;
  EndAccelerations accel;
  std::array<double, 2> key{0.0, 0.0};
  std::optional<std::size_t> index;  // empty for an empty store
  double key_distance = 0.0;
  double anchor_distance = 0.0;
};

/// End values from the coarse fields, end accelerations against the previous
/// fine state (zero without one), then the stored sheet with the nearest key
/// and, among key ties, the anchor nearest the previous fine state.
GaussSelection select_manifold_at_gauss(const SubDomain& sub, const ManifoldStore& store, const GaussValues& c,
                                        const Vec* previous, double dt, double tie_tol = 1e-9,
                                        FlopCounter* flops = nullptr);

struct CoupledConfig {
  int elements = 8;
  double eps = 1.0 / 32.0;  // sub-domain half-width
  int nodes_per_wavelength = 20;
  double accel_spacing = 0.5;
  double tie_tol = 1e-9;
  double reuse_tol = 1e-3;  // previous fine state must lie this close (relative) to a reused sheet
  double window = 2.5;       // sheets cover window * dt of coarse motion
  double floor_scale = 0.5;  // half-widths are at least 5% of this fraction of the largest nodal value
  MarchConfig march;
  par::Exec exec = par::Exec::Parallel;
};

struct GaussSite {
  SubDomain sub;
  ManifoldStore store;
  Vec cached;  // fine state at the start of the interval that ends at the current step
  bool has_previous = false;
};

struct CoupledStats {
  std::size_t steps = 0;
  std::size_t sheets_solved = 0;
  std::size_t sheets_reused = 0;
  std::size_t family_lifts = 0;  // site steps lifted on the cached state's family for want of a usable sheet
  std::size_t clamped_lifts = 0;  // lifts moved to the nearest point where the sheet is defined
};

struct CoupledDomain {
  Medium1D medium;
  CoarseMesh mesh;
  CoupledConfig config;
  std::vector<GaussSite> sites;  // one per Gauss point, same order
  Vec alpha;                     // nodal accelerations at the last step, sizes new sheets
  CoupledStats stats;
};

CoupledDomain make_coupled_domain(const Medium1D& medium, const CoupledConfig& config);

/// Nodal coarse state; the end nodes are held fixed.
struct CoarseState {
  Vec u;
  Vec v;
};

/// Coarse nodal values are window averages of the fine initial fields; each
/// site caches the fine fields on its own mesh, shifted uniformly to the
/// interpolated coarse values.
CoarseState coupled_initial_state(CoupledDomain& domain, const std::function<double(double)>& u0,
                                  const std::function<double(double)>& v0);

/// One RK4 step of the coarse Galerkin system driven by the averaged stress
/// of sheet lifts at the Gauss points. A coarse point off its sheet is lifted
/// at the nearest point where the sheet is defined.
CoarseState coupled_coarse_step(CoupledDomain& domain, const CoarseState& s, double dt,
                                FlopCounter* flops = nullptr);

struct CoupledRun {
  std::vector<double> t;
  std::vector<CoarseState> states;
};

CoupledRun run_coupled(CoupledDomain& domain, const CoarseState& s0, double dt, double horizon,
                       FlopCounter* flops = nullptr);

/// Largest angular frequency of the coarse mesh with constant modulus e and
/// fixed ends.
double coarse_max_frequency(const CoarseMesh& mesh, double e);

/// Window averages of fine nodal values around each x.
Vec window_averages(const GalerkinOps& ops, const Vec& values, const std::vector<double>& xs, double eps);

}  // namespace plim::elasto
