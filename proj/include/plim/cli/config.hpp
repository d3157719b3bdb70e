#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plim/atlas/atlas.hpp"
#include "plim/elastowave/experiment.hpp"

namespace plim::cli {

/// How the atlas of a run is obtained.
struct AtlasSource {
  std::string path;                          // read this file when set
  std::string generate = "all";              // all | none | listed | exact
  std::vector<std::array<int, 2>> blocks;    // for "listed"
  std::vector<int> nodes;                    // mesh nodes per block side; empty keeps the default
  std::optional<std::vector<std::vector<double>>> anchors;  // anchor data; unset keeps the default
  int iters_per_temp = 0;                    // 0 keeps the default
  int failure_budget = -1;                   // failed solves tolerated; -1 for any number
};

struct ElastoSettings {
  std::string mode = "coupled";  // coupled | subdomain
  std::string law = "cos";       // cos | sin | constant
  double length = 1.0;
  double rho = 1.0;
  double E0 = 1.0;
  double lambda_E = 1.0 / 16.0;
  int nodes_per_wavelength = 20;
  double periods = 6.0;
  // coupled
  int elements = 8;
  double eps = 1.0 / 32.0;
  int velocity_mode = 8;
  double fine_cfl = 0.25;
  int step_ratio = 20;
  // subdomain
  double center = 1.0;
  double sub_eps = 1.0;
  double sub_periods = 3.0;
  double wavelength_ratio = 4.0 / 3.0;
  double sub_dt = 0.005;
  double window = 0.02;
};

struct RunConfig {
  std::string system = "lorenz";  // lorenz | hamiltonian4 | oscillator | elastowave
  std::string preset = "L1";      // empty: use initial
  std::vector<double> initial;
  double dt = 1e-3;       // coarse step
  double fine_dt = 1e-4;  // fine reference step
  double horizon = 2.0;
  bool supplemental = false;
  double supplement_threshold = 0.5;
  std::uint64_t seed = 0;
  std::string out = "out";
  AtlasSource atlas;
  ElastoSettings elasto;

  /// Throws Config on unknown systems or presets, non-positive steps or a
  /// preset of another system.
  void validate() const;
  Vec initial_state() const;
};

/// Reads a YAML file; keys missing from it keep their defaults. Throws Config.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

/// Commented YAML listing every key with its default.
std::string config_template();

/// Generation spec of the configured system with the atlas overrides applied.
AtlasSpec atlas_spec(const RunConfig& config);

elasto::SubdomainExperimentConfig subdomain_config(const RunConfig& config);
elasto::CoupledExperimentConfig coupled_config(const RunConfig& config);

}  // namespace plim::cli
