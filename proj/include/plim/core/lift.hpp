#pragma once

#include "plim/atlas/sheet.hpp"
#include "plim/core/fine_system.hpp"

namespace plim {

/// Coarse state on a sheet. lift caches G(coarse) as a fine state.
struct EvolutionState {
  Vec coarse;
  SheetId sheet_id = kNoSheet;
  double t = 0.0;
  Vec lift;
};

/// Fine state G(c) on the sheet.
Vec lift_point(const ProjectionMap& proj, const Sheet& sheet, const Vec& c);

/// Closed coarse rate DPi[H(G(c))].
Vec coarse_rhs(const FineSystem& sys, const ProjectionMap& proj, const Sheet& sheet, const Vec& c);

/// True iff |DPi[H(f)]| <= tol |H(f)| and |H(f)| > tol.
bool detect_singularity(const FineSystem& sys, const ProjectionMap& proj, const Vec& f, double tol = 1e-8);

/// f + eps H(f). Requires H(f) != 0.
Vec perturb_singular(const FineSystem& sys, const Vec& f, double eps = 1e-4);

/// Applies perturb_singular until detect_singularity clears; throws
/// UnresolvableSingularity after max_retries perturbations. Returns the
/// number of perturbations applied through `applied`.
Vec escape_singularity(const FineSystem& sys, const ProjectionMap& proj, Vec f, double tol, double eps,
                       int max_retries, int* applied = nullptr);

}  // namespace plim
