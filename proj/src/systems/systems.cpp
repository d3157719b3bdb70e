#include "plim/systems/systems.hpp"

#include <cmath>

namespace plim::systems {

FineSystem lorenz(const LorenzParams& p) {
  FineSystem s;
  s.name = "lorenz";
  s.dim = 3;
  s.params = {{"sigma", p.sigma}, {"b", p.b}, {"r", p.r}};
  s.rhs = [p](const Vec& f) {
    Vec h(3);
    h[0] = p.sigma * (f[1] - f[0]);
    h[1] = p.r * f[0] - f[1] - f[0] * f[2];
    h[2] = f[0] * f[1] - p.b * f[2];
    return h;
  };
  return s;
}

FineSystem hamiltonian4() {
  FineSystem s;
  s.name = "hamiltonian4";
  s.dim = 4;
  s.rhs = [](const Vec& f) {
    Vec h(4);
    h[0] = f[1];
    h[1] = -f[0] * (1.0 + f[2] * f[2]);
    h[2] = f[3];
    h[3] = -f[2] * (1.0 + f[0] * f[0]);
    return h;
  };
  return s;
}

FineSystem oscillator() {
  FineSystem s;
  s.name = "oscillator";
  s.dim = 2;
  s.rhs = [](const Vec& f) {
    Vec h(2);
    h[0] = -f[1];
    h[1] = f[0];
    return h;
  };
  return s;
}

ProjectionMap lorenz_projection() { return ProjectionMap::selection(3, {0, 2}); }
ProjectionMap hamiltonian_projection() { return ProjectionMap::selection(4, {0, 1}); }
ProjectionMap oscillator_projection() { return ProjectionMap::selection(2, {0}); }

GEquation lorenz_geq(const LorenzParams& p) {
  return GEquation::make("lorenz", 1, 2, [p](auto c, auto g, auto dg, auto r) {
    const double x = c[0], z = c[1];
    r[0] = p.sigma * (g[0] - x) * dg[0] + (x * g[0] - p.b * z) * dg[1] + g[0] + x * (z - p.r);
  });
}

GEquation hamiltonian_geq() {
  return GEquation::make("hamiltonian4", 2, 2, [](auto c, auto g, auto dg, auto r) {
    const double x1 = c[0], x2 = c[1];
    const auto a = -x1 * (1.0 + g[0] * g[0]);
    r[0] = x2 * dg[0] + a * dg[1] - g[1];
    r[1] = x2 * dg[2] + a * dg[3] + g[0] * (1.0 + x1 * x1);
  });
}

GEquation oscillator_geq() {
  return GEquation::make("oscillator", 1, 1, [](auto c, auto g, auto dg, auto r) { r[0] = dg[0] * g[0] + c[0]; });
}

double hamiltonian_energy(const Vec& f) {
  return 0.5 * (f[1] * f[1] + f[3] * f[3]) + 0.5 * (f[0] * f[0] + f[2] * f[2]) + 0.5 * f[0] * f[0] * f[2] * f[2];
}

ConservedQuantity hamiltonian_energy_quantity() {
  return {"energy", [](const Vec& f) { return hamiltonian_energy(f); }, ConservedQuantity::Rate::Zero};
}

ConservedQuantity oscillator_energy_quantity() {
  return {"energy", [](const Vec& f) { return 0.5 * f.squaredNorm(); }, ConservedQuantity::Rate::Zero};
}

std::vector<Vec> lorenz_fixed_points(const LorenzParams& p) {
  const double a = std::sqrt(p.b * (p.r - 1.0));
  return {Vec::Zero(3), Vec{{a, a, p.r - 1.0}}, Vec{{-a, -a, p.r - 1.0}}};
}

Sheet exact_oscillator_sheet(double x0, double y0, const BlockGeometry& geom, BlockIndex block) {
  if (x0 == 0.0 && y0 == 0.0) throw Error(ErrorKind::Precondition, "oscillator sheet through the origin");
  require(geom.dim == 1, "oscillator sheets live on 1-D blocks");
  const double r2 = x0 * x0 + y0 * y0;
  double sign = y0 > 0 ? 1.0 : -1.0;
  if (y0 == 0.0) sign = x0 > 0 ? -1.0 : 1.0;

  Sheet s;
  s.block = block;
  s.geom = geom;
  s.n_components = 1;
  s.values.resize(static_cast<std::size_t>(geom.node_count()));
  s.pruned.assign(s.values.size(), 0);
  for (int n = 0; n < geom.node_count(); ++n) {
    const double x = geom.node_coords(n)[0];
    const double d = r2 - x * x;
    s.values[static_cast<std::size_t>(n)] = d >= 0.0 ? sign * std::sqrt(d) : 0.0;
    if (d < 0.0) s.pruned[static_cast<std::size_t>(n)] = 1;
  }
  s.degenerate = s.pruned_count() == s.pruned.size();
  if (s.pruned_count() == 0) s.pruned.clear();
  s.anchor = {Vec{{x0}}, Vec{{y0}}};
  return s;
}

AtlasSpec default_atlas_spec(const std::string& system) {
  AtlasSpec a;
  a.system = system;
  if (system == "lorenz") {
    a.projection = lorenz_projection().describe();
    a.dim = 2;
    a.lo = {-24.0, 0.0};
    a.hi = {24.0, 48.0};
    a.block_size = {4.0, 4.0};
    a.nodes = {6, 6};
    a.corners = AtlasSpec::Corners::All;
    for (int k = 0; k <= 48; ++k) a.anchor_data.push_back(Vec{{-24.0 + k}});
    a.gsolve.mode = SolveMode::Real;
    a.gsolve.accept_threshold = 1e3;
  } else if (system == "hamiltonian4") {
    a.projection = hamiltonian_projection().describe();
    a.dim = 2;
    a.lo = {-2.0, -2.0};
    a.hi = {2.0, 2.0};
    a.block_size = {1.0, 1.0};
    a.nodes = {6, 6};
    a.corners = AtlasSpec::Corners::LowerLeft;
    for (int k = 0; k <= 8; ++k) a.anchor_data.push_back(Vec{{-1.0 + 0.25 * k, 0.0}});
    for (int k = 0; k <= 8; ++k) {
      if (k != 4) a.anchor_data.push_back(Vec{{0.0, -1.0 + 0.25 * k}});
    }
    a.gsolve.mode = SolveMode::Real;
  } else if (system == "oscillator") {
    a.projection = oscillator_projection().describe();
    a.dim = 1;
    a.lo = {-3.0, 0.0};
    a.hi = {3.0, 1.0};
    a.block_size = {2.0, 1.0};
    a.nodes = {9, 1};
    a.corners = AtlasSpec::Corners::All;
    for (double y : {-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0}) a.anchor_data.push_back(Vec{{y}});
    a.gsolve.mode = SolveMode::Complex;
    a.gsolve.accept_threshold = 0.1;
    a.gsolve.anneal.iters_per_temp = 1000;
  } else {
    throw Error(ErrorKind::UnknownSystem, "no atlas defaults for '" + system + "'");
  }
  return a;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"L1", "lorenz", Vec{{0.0, 2.0, 8.0}}},
      {"L2", "lorenz", Vec{{-10.0, 5.0, 23.0}}},
      {"L3", "lorenz", Vec{{1.0, -5.0, 12.0}}},
      {"L4", "lorenz", Vec{{10.0, 5.0, 13.0}}},
      {"H1", "hamiltonian4", Vec{{-0.875, -0.875, 0.5, 0.5}}},
      {"H2", "hamiltonian4", Vec{{1.125, 1.125, 0.5, 0.5}}},
      {"C-Ex1", "oscillator", Vec{{-0.3, -1.8}}},
      {"C-Ex2", "oscillator", Vec{{0.2, 1.0}}},
  };
  return all;
}

const Preset& preset(const std::string& name) {
  for (const Preset& p : presets()) {
    if (p.name == name) return p;
  }
  throw Error(ErrorKind::Config, "unknown preset '" + name + "'");
}

SystemBundle bundle(const std::string& system) {
  if (system == "lorenz") return {lorenz(), lorenz_projection(), lorenz_geq(), std::nullopt};
  if (system == "hamiltonian4") {
    return {hamiltonian4(), hamiltonian_projection(), hamiltonian_geq(), hamiltonian_energy_quantity()};
  }
  if (system == "oscillator") {
    return {oscillator(), oscillator_projection(), oscillator_geq(), oscillator_energy_quantity()};
  }
  throw Error(ErrorKind::UnknownSystem, "unknown system '" + system + "'");
}

}  // namespace plim::systems
