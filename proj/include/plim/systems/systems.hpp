#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plim/atlas/atlas.hpp"
#include "plim/core/fine_system.hpp"
#include "plim/gsolve/gequation.hpp"

namespace plim::systems {

struct LorenzParams {
  double sigma = 10.0;
  double b = 8.0 / 3.0;
  double r = 25.0;
};

FineSystem lorenz(const LorenzParams& p = {});
FineSystem hamiltonian4();
FineSystem oscillator();

/// Keeps (x, z) of the Lorenz state.
ProjectionMap lorenz_projection();
/// Keeps (x1, x2).
ProjectionMap hamiltonian_projection();
/// Keeps x.
ProjectionMap oscillator_projection();

/// sigma (G - x) G_x + (x G - b z) G_z + G + x (z - r)
GEquation lorenz_geq(const LorenzParams& p = {});
/// Two components, G = (x3, x4) over (x1, x2).
GEquation hamiltonian_geq();
/// G G' + x
GEquation oscillator_geq();

/// E = (x2^2 + x4^2)/2 + (x1^2 + x3^2)/2 + x1^2 x3^2 / 2.
double hamiltonian_energy(const Vec& f);
ConservedQuantity hamiltonian_energy_quantity();
/// (x^2 + y^2)/2.
ConservedQuantity oscillator_energy_quantity();

/// Lorenz equilibria for the given parameters: origin, then (+), then (-).
std::vector<Vec> lorenz_fixed_points(const LorenzParams& p = {});

/// Nodal samples of the branch of +-sqrt(r0^2 - x^2) through (x0, y0);
/// nodes with x^2 > r0^2 are masked. For y0 = 0 the branch is the one the
/// flow enters: lower for x0 > 0, upper for x0 < 0.
Sheet exact_oscillator_sheet(double x0, double y0, const BlockGeometry& geom, BlockIndex block = {});

/// Generation parameters following the published set-up of each system.
/// Throws UnknownSystem for other names.
AtlasSpec default_atlas_spec(const std::string& system);

struct Preset {
  std::string name;
  std::string system;
  Vec state;
};

const std::vector<Preset>& presets();
/// Throws Config when the name is unknown.
const Preset& preset(const std::string& name);

/// Fine system, projection and G-equation bundled by system name.
struct SystemBundle {
  FineSystem fine;
  ProjectionMap projection;
  GEquation geq;
  std::optional<ConservedQuantity> conserved;
};

SystemBundle bundle(const std::string& system);

}  // namespace plim::systems
