#pragma once

#include <string>
#include <vector>

#include "plim/elastowave/coupled.hpp"

namespace plim::elasto {

/// Single sub-domain driven by constant end accelerations, compared with
/// the window average of its fine solution and of a homogeneous bar.
struct SubdomainExperimentConfig {
  Medium1D medium = [] {
    Medium1D m;
    m.law = Medium1D::Law::Sin;
    m.lambda_E = 1.0;
    return m;
  }();
  double center = 1.0;
  double eps = 1.0;
  int nodes_per_wavelength = 20;
  double wavelength_ratio = 4.0 / 3.0;  // v_hat = sin(3 pi y / lambda), lambda = ratio * lambda_E
  double periods = 3.0;                 // of the long wave in the effective medium
  double fine_cfl = 0.5;                // fine dt as a fraction of 2.8 / omega_max
  double baseline_modulus = 0.0;        // 0: mean of E
  SubdomainRunConfig run = [] {
    SubdomainRunConfig r;
    r.dt = 0.005;
    r.window = 0.02;
    return r;
  }();
};

struct SubdomainExperiment {
  double dt_fine = 0.0;
  double horizon = 0.0;
  std::vector<double> t;
  std::vector<Vec> fine;  // (u_bar, v_bar) at the coarse times
  std::vector<Vec> coarse;
  std::vector<Vec> homogeneous;
  std::size_t sheets_solved = 0;
  double rel_error[2] = {0.0, 0.0};  // relative L2 over the coarse samples, u_bar then v_bar
  double baseline_error[2] = {0.0, 0.0};
  std::int64_t fine_flops = 0;
  std::int64_t coarse_flops = 0;
  std::int64_t manifold_flops = 0;
};

SubdomainExperiment run_subdomain_experiment(const SubdomainExperimentConfig& config);

/// Coupled run over the whole bar against the window averages of the fine
/// solution and of a homogeneous bar, at the coarse nodes.
struct CoupledExperimentConfig {
  Medium1D medium;
  CoupledConfig coupled;
  int velocity_mode = 8;  // u_hat = 0, v_hat = sin(mode pi x / L)
  double periods = 6.0;   // of that mode in the effective medium
  double fine_cfl = 0.25;
  int step_ratio = 20;  // coarse dt / fine dt
  double baseline_modulus = 0.0;
};

struct CoupledExperiment {
  double dt_fine = 0.0;
  double dt_coarse = 0.0;
  double horizon = 0.0;
  std::size_t planned_steps = 0;
  bool completed = false;
  std::string message;
  std::vector<double> x;  // interior coarse nodes
  std::vector<double> t;  // coarse times reached
  std::vector<Vec> fine_u, fine_v, coarse_u, coarse_v, hom_u, hom_v;
  double rel_error[2] = {0.0, 0.0};  // over the coarse times reached
  double baseline_error[2] = {0.0, 0.0};
  std::int64_t fine_flops = 0;  // fine reference over the full horizon
  std::int64_t coarse_flops = 0;
  std::int64_t manifold_flops = 0;
  std::size_t fine_steps = 0;
  CoupledStats stats;
  double fine_seconds = 0.0;
  double coarse_seconds = 0.0;
};

CoupledExperiment run_coupled_experiment(const CoupledExperimentConfig& config);

}  // namespace plim::elasto
