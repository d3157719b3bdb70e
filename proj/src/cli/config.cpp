#include "plim/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>

#include "plim/systems/systems.hpp"

namespace plim::cli {

namespace {

const std::vector<std::string> kSystems = {"lorenz", "hamiltonian4", "oscillator", "elastowave"};

void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

template <class T>
void read(const YAML::Node& node, const char* key, T& dst) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return;
  try {
    dst = v.as<T>();
  } catch (const YAML::Exception& e) {
    config_error(std::string("key '") + key + "': " + e.what());
  }
}

void check_keys(const YAML::Node& node, const std::string& where, const std::vector<std::string>& allowed) {
  if (!node) return;
  if (!node.IsMap()) config_error("'" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      config_error("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

elasto::Medium1D::Law law_of(const std::string& s) {
  if (s == "cos") return elasto::Medium1D::Law::Cos;
  if (s == "sin") return elasto::Medium1D::Law::Sin;
  if (s == "constant") return elasto::Medium1D::Law::Constant;
  config_error("elastowave.law must be cos, sin or constant, got '" + s + "'");
  return elasto::Medium1D::Law::Cos;
}

elasto::Medium1D medium_of(const ElastoSettings& e) {
  elasto::Medium1D m;
  m.length = e.length;
  m.rho = e.rho;
  m.E0 = e.E0;
  m.lambda_E = e.lambda_E;
  m.law = law_of(e.law);
  return m;
}

}  // namespace

void RunConfig::validate() const {
  if (std::find(kSystems.begin(), kSystems.end(), system) == kSystems.end())
    config_error("unknown system '" + system + "'");
  if (!(dt > 0.0) || !(fine_dt > 0.0) || !(horizon > 0.0)) config_error("dt, fine_dt and horizon must be positive");
  if (!(supplement_threshold >= 0.0)) config_error("supplement_threshold must be non-negative");
  if (system == "elastowave") {
    const auto& e = elasto;
    if (e.mode != "coupled" && e.mode != "subdomain") config_error("elastowave.mode must be coupled or subdomain");
    law_of(e.law);
    if (!(e.length > 0.0 && e.rho > 0.0 && e.E0 > 0.0 && e.lambda_E > 0.0))
      config_error("elastowave medium parameters must be positive");
    if (e.nodes_per_wavelength < 2 || e.elements < 1 || e.step_ratio < 1 || !(e.eps > 0.0) || !(e.periods > 0.0) ||
        !(e.fine_cfl > 0.0) || !(e.sub_eps > 0.0) || !(e.sub_periods > 0.0) || !(e.sub_dt > 0.0) || !(e.wavelength_ratio > 0.0))
      config_error("elastowave discretisation parameters out of range");
    return;
  }
  if (atlas.generate != "all" && atlas.generate != "none" && atlas.generate != "listed" && atlas.generate != "exact")
    config_error("atlas.generate must be all, none, listed or exact");
  if (atlas.generate == "exact" && system != "oscillator") config_error("atlas.generate: exact is oscillator only");
  if (!atlas.nodes.empty() && atlas.nodes.size() != 2) config_error("atlas.nodes takes two entries");
  if (preset.empty()) {
    const auto dim = systems::bundle(system).fine.dim;
    if (initial.size() != static_cast<std::size_t>(dim))
      config_error("initial must have " + std::to_string(dim) + " entries for " + system);
  } else if (systems::preset(preset).system != system) {
    config_error("preset " + preset + " belongs to " + systems::preset(preset).system + ", not " + system);
  }
}

Vec RunConfig::initial_state() const {
  if (!preset.empty()) return systems::preset(preset).state;
  return Eigen::Map<const Vec>(initial.data(), static_cast<Eigen::Index>(initial.size()));
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    config_error(std::string("yaml: ") + e.what());
  }
  RunConfig c;
  if (!root || root.IsNull()) return c;
  check_keys(root, "",
             {"system", "preset", "initial", "dt", "fine_dt", "horizon", "supplemental", "supplement_threshold", "seed",
              "out", "atlas", "elastowave"});
  read(root, "system", c.system);
  read(root, "preset", c.preset);
  read(root, "initial", c.initial);
  if (root["initial"] && !root["preset"]) c.preset.clear();
  if (!root["preset"] && !root["initial"] && c.system != "lorenz") {
    c.preset.clear();
    for (const auto& p : systems::presets())
      if (p.system == c.system) {
        c.preset = p.name;
        break;
      }
  }
  read(root, "dt", c.dt);
  read(root, "fine_dt", c.fine_dt);
  read(root, "horizon", c.horizon);
  read(root, "supplemental", c.supplemental);
  read(root, "supplement_threshold", c.supplement_threshold);
  read(root, "seed", c.seed);
  read(root, "out", c.out);

  if (const YAML::Node a = root["atlas"]) {
    check_keys(a, "atlas", {"path", "generate", "blocks", "nodes", "anchors", "iters_per_temp", "failure_budget"});
    read(a, "path", c.atlas.path);
    read(a, "generate", c.atlas.generate);
    read(a, "blocks", c.atlas.blocks);
    read(a, "nodes", c.atlas.nodes);
    if (a["anchors"]) {
      std::vector<std::vector<double>> anchors;
      read(a, "anchors", anchors);
      c.atlas.anchors = std::move(anchors);
    }
    read(a, "iters_per_temp", c.atlas.iters_per_temp);
    read(a, "failure_budget", c.atlas.failure_budget);
  }
  if (const YAML::Node e = root["elastowave"]) {
    check_keys(e, "elastowave",
               {"mode", "law", "length", "rho", "E0", "lambda_E", "nodes_per_wavelength", "periods", "elements", "eps",
                "velocity_mode", "fine_cfl", "step_ratio", "center", "sub_eps", "sub_periods", "wavelength_ratio", "sub_dt",
                "window"});
    auto& s = c.elasto;
    read(e, "mode", s.mode);
    read(e, "law", s.law);
    read(e, "length", s.length);
    read(e, "rho", s.rho);
    read(e, "E0", s.E0);
    read(e, "lambda_E", s.lambda_E);
    read(e, "nodes_per_wavelength", s.nodes_per_wavelength);
    read(e, "periods", s.periods);
    read(e, "elements", s.elements);
    read(e, "eps", s.eps);
    read(e, "velocity_mode", s.velocity_mode);
    read(e, "fine_cfl", s.fine_cfl);
    read(e, "step_ratio", s.step_ratio);
    read(e, "center", s.center);
    read(e, "sub_eps", s.sub_eps);
    read(e, "sub_periods", s.sub_periods);
    read(e, "wavelength_ratio", s.wavelength_ratio);
    read(e, "sub_dt", s.sub_dt);
    read(e, "window", s.window);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    config_error("cannot read " + path);
  } catch (const YAML::Exception& e) {
    config_error(path + ": " + e.what());
  }
  return parse_config(YAML::Dump(root));
}

std::string config_template() {
  return R"(# Run configuration. Every key is optional; the values shown are the defaults.

system: lorenz            # lorenz | hamiltonian4 | oscillator | elastowave
preset: L1                # L1..L4 (lorenz), H1 H2 (hamiltonian4), C-Ex1 C-Ex2 (oscillator);
                          # defaults to the first preset of the system
# initial: [0, 2, 8]      # explicit fine initial state; used when no preset is given
dt: 0.001                 # coarse time step
fine_dt: 0.0001           # fine reference time step
horizon: 2.0              # final time T
supplemental: false       # solve sheets on demand at delivered states
supplement_threshold: 0.5 # solve a new sheet when the nearest one is farther than this
seed: 0                   # base seed of the sheet solves
out: out                  # output directory

atlas:
  path: ""                # existing atlas file (binary or text export); empty: generate
  generate: all           # all | none | listed (blocks below) | exact (oscillator: closed-form
                          # branches through the initial state on one block)
  blocks: []              # lattice indices [i, j] for generate: listed
  nodes: []               # mesh nodes per block side, e.g. [6, 6]; empty: system default
  # anchors: [[8]]        # anchor data per corner; omitted: system default, []: none
  iters_per_temp: 0       # annealing iterations per temperature; 0: system default
  failure_budget: -1      # failed sheet solves tolerated before precompute aborts; -1: no limit

elastowave:               # used when system is elastowave; the single-window study uses law: sin, lambda_E: 1
  mode: coupled           # coupled (whole bar) | subdomain (one window)
  law: cos                # modulus law: cos | sin | constant
  length: 1.0
  rho: 1.0
  E0: 1.0
  lambda_E: 0.0625        # modulus period
  nodes_per_wavelength: 20
  periods: 6.0            # horizon in periods of the initial wave (coupled)
  elements: 8             # coarse quadratic elements (coupled)
  eps: 0.03125            # sub-domain half-width (coupled)
  velocity_mode: 8        # initial v = sin(mode pi x / L) (coupled)
  fine_cfl: 0.25          # fine dt as a fraction of 2.8 / omega_max (coupled)
  step_ratio: 20          # coarse dt / fine dt (coupled)
  center: 1.0             # sub-domain centre (subdomain)
  sub_eps: 1.0            # sub-domain half-width (subdomain)
  sub_periods: 3.0        # horizon in periods of the initial wave (subdomain)
  wavelength_ratio: 1.3333333333333333  # initial wavelength / lambda_E (subdomain)
  sub_dt: 0.005           # coarse step (subdomain)
  window: 0.02            # sheets cover this much time of coarse motion (subdomain)
)";
}

AtlasSpec atlas_spec(const RunConfig& config) {
  AtlasSpec spec = systems::default_atlas_spec(config.system);
  if (!config.atlas.nodes.empty()) spec.nodes = {config.atlas.nodes[0], config.atlas.nodes[1]};
  if (config.atlas.anchors) {
    spec.anchor_data.clear();
    for (const auto& a : *config.atlas.anchors)
      spec.anchor_data.push_back(Eigen::Map<const Vec>(a.data(), static_cast<Eigen::Index>(a.size())));
  }
  if (config.atlas.iters_per_temp > 0) spec.gsolve.anneal.iters_per_temp = config.atlas.iters_per_temp;
  try {
    spec.validate();
  } catch (const Error& e) {
    config_error(std::string("atlas: ") + e.what());
  }
  return spec;
}

elasto::SubdomainExperimentConfig subdomain_config(const RunConfig& config) {
  const auto& e = config.elasto;
  elasto::SubdomainExperimentConfig s;
  s.medium = medium_of(e);
  s.center = e.center;
  s.eps = e.sub_eps;
  s.nodes_per_wavelength = e.nodes_per_wavelength;
  s.wavelength_ratio = e.wavelength_ratio;
  s.periods = e.sub_periods;
  s.run.dt = e.sub_dt;
  s.run.window = e.window;
  return s;
}

elasto::CoupledExperimentConfig coupled_config(const RunConfig& config) {
  const auto& e = config.elasto;
  elasto::CoupledExperimentConfig c;
  c.medium = medium_of(e);
  c.coupled.elements = e.elements;
  c.coupled.eps = e.eps;
  c.coupled.nodes_per_wavelength = e.nodes_per_wavelength;
  c.velocity_mode = e.velocity_mode;
  c.periods = e.periods;
  c.fine_cfl = e.fine_cfl;
  c.step_ratio = e.step_ratio;
  return c;
}

}  // namespace plim::cli
