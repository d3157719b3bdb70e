#include "plim/elastowave/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "plim/error.hpp"

namespace plim::elasto {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double baseline(const Medium1D& m, double requested) {
  return requested > 0.0 ? requested : m.mean_modulus(0.0, m.lambda_E);
}

// Linear interpolation of a trajectory at t.
Vec sample(const FineTrajectory& tr, double t) {
  const std::size_t last = tr.size() - 1;
  if (t >= tr.t[last]) return tr.states[last];
  std::size_t k = static_cast<std::size_t>(std::upper_bound(tr.t.begin(), tr.t.end(), t) - tr.t.begin());
  k = std::max<std::size_t>(k, 1);
  const double a = (t - tr.t[k - 1]) / (tr.t[k] - tr.t[k - 1]);
  return (1.0 - a) * tr.states[k - 1] + a * tr.states[k];
}

}  // namespace

SubdomainExperiment run_subdomain_experiment(const SubdomainExperimentConfig& config) {
  require(config.periods > 0.0 && config.wavelength_ratio > 0.0, "run_subdomain_experiment: bad horizon");
  SubdomainExperiment out;
  const Medium1D& med = config.medium;
  const SubDomain sub = make_subdomain(med, config.center, config.eps, config.nodes_per_wavelength, Boundary::Acceleration);
  const SubDomain hom = make_subdomain(med.homogeneous(baseline(med, config.baseline_modulus)), config.center,
                                       config.eps, config.nodes_per_wavelength, Boundary::Acceleration);
  const int n = sub.eta();
  const double lambda = config.wavelength_ratio * med.lambda_E;
  Vec f0 = Vec::Zero(2 * n);
  for (int k = 0; k < n; ++k) {
    const double y = sub.ops.x[static_cast<std::size_t>(k)] - sub.ops.x0;
    f0(n + k) = std::sin(3.0 * std::numbers::pi * y / lambda);
  }
  out.horizon = config.periods * lambda / std::sqrt(med.harmonic_modulus() / med.rho);
  out.dt_fine = config.fine_cfl * 2.8 / sub.omega_max;

  FlopCounter flops;
  const auto fine = fine_integrate(galerkin_system(sub.ops, config.run.a_o, config.run.a_l, &flops), f0, out.dt_fine,
                                   out.horizon);
  out.fine_flops = flops.fine;
  const auto base = fine_integrate(galerkin_system(hom.ops, config.run.a_o, config.run.a_l), f0, out.dt_fine,
                                   out.horizon);

  SubdomainRunConfig rc = config.run;
  rc.horizon = out.horizon;
  const SubdomainRun run = evolve_subdomain(sub, f0, rc, &flops);
  out.coarse_flops = flops.coarse;
  out.manifold_flops = flops.manifold;
  out.sheets_solved = run.sheets_solved;
  out.t = run.t;
  out.coarse = run.coarse;

  double err[2] = {0, 0}, herr[2] = {0, 0}, norm[2] = {0, 0};
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    out.fine.push_back(sub.coarse_of(sample(fine, run.t[k])));
    out.homogeneous.push_back(hom.coarse_of(sample(base, run.t[k])));
    for (int j = 0; j < 2; ++j) {
      err[j] += std::pow(out.coarse[k](j) - out.fine[k](j), 2);
      herr[j] += std::pow(out.homogeneous[k](j) - out.fine[k](j), 2);
      norm[j] += std::pow(out.fine[k](j), 2);
    }
  }
  for (int j = 0; j < 2; ++j) {
    out.rel_error[j] = std::sqrt(err[j] / norm[j]);
    out.baseline_error[j] = std::sqrt(herr[j] / norm[j]);
  }
  return out;
}

CoupledExperiment run_coupled_experiment(const CoupledExperimentConfig& config) {
  require(config.step_ratio >= 1 && config.periods > 0.0 && config.fine_cfl > 0.0,
          "run_coupled_experiment: bad step settings");
  CoupledExperiment out;
  const Medium1D& med = config.medium;
  const double len = med.length;
  const double k = config.velocity_mode * std::numbers::pi / len;

  CoupledDomain domain = make_coupled_domain(med, config.coupled);
  const GalerkinOps fine = assemble_galerkin(med, 0.0, len, config.coupled.nodes_per_wavelength, Boundary::Fixed);
  const GalerkinOps hom = assemble_galerkin(med.homogeneous(baseline(med, config.baseline_modulus)), 0.0, len,
                                            config.coupled.nodes_per_wavelength, Boundary::Fixed);
  const double e_max = med.law == Medium1D::Law::Constant ? med.E0 : 3.0 * med.E0;
  out.dt_fine = std::min(config.fine_cfl * 2.8 / max_frequency(fine),
                         2.8 / coarse_max_frequency(domain.mesh, e_max) / config.step_ratio);
  out.dt_coarse = config.step_ratio * out.dt_fine;
  const double period = 2.0 * len / config.velocity_mode / std::sqrt(med.harmonic_modulus() / med.rho);
  out.planned_steps = static_cast<std::size_t>(std::ceil(config.periods * period / out.dt_coarse - 1e-9));
  out.horizon = static_cast<double>(out.planned_steps) * out.dt_coarse;
  out.fine_steps = out.planned_steps * static_cast<std::size_t>(config.step_ratio);

  const int n = fine.eta;
  Vec f0 = Vec::Zero(2 * n);
  for (int i = 1; i + 1 < n; ++i) f0(n + i) = std::sin(k * fine.x[static_cast<std::size_t>(i)]);

  FlopCounter fine_flops;
  auto t0 = Clock::now();
  const auto ref = fine_integrate(galerkin_system(fine, 0.0, 0.0, &fine_flops, config.coupled.exec), f0,
                                  out.dt_fine, static_cast<double>(out.fine_steps) * out.dt_fine);
  out.fine_seconds = seconds_since(t0);
  out.fine_flops = fine_flops.fine;
  const auto base = fine_integrate(galerkin_system(hom, 0.0, 0.0, nullptr, config.coupled.exec), f0, out.dt_fine,
                                   static_cast<double>(out.fine_steps) * out.dt_fine);

  for (int i = 1; i + 1 < domain.mesh.nodes(); ++i) out.x.push_back(domain.mesh.x(i));
  const auto ni = static_cast<Eigen::Index>(out.x.size());
  const double eps = config.coupled.eps;

  FlopCounter flops;
  t0 = Clock::now();
  CoarseState s = coupled_initial_state(domain, [](double) { return 0.0; }, [k](double x) { return std::sin(k * x); });
  auto record = [&](std::size_t step, const CoarseState& c) {
    const std::size_t j = step * static_cast<std::size_t>(config.step_ratio);
    out.t.push_back(static_cast<double>(step) * out.dt_coarse);
    out.fine_u.push_back(window_averages(fine, ref.states[j].head(n), out.x, eps));
    out.fine_v.push_back(window_averages(fine, ref.states[j].tail(n), out.x, eps));
    out.hom_u.push_back(window_averages(hom, base.states[j].head(n), out.x, eps));
    out.hom_v.push_back(window_averages(hom, base.states[j].tail(n), out.x, eps));
    out.coarse_u.push_back(c.u.segment(1, ni));
    out.coarse_v.push_back(c.v.segment(1, ni));
  };
  record(0, s);
  out.completed = true;
  for (std::size_t step = 1; step <= out.planned_steps; ++step) {
    try {
      s = coupled_coarse_step(domain, s, out.dt_coarse, &flops);
    } catch (const Error& e) {
      out.completed = false;
      out.message = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    record(step, s);
  }
  out.coarse_seconds = seconds_since(t0);
  out.coarse_flops = flops.coarse;
  out.manifold_flops = flops.manifold;
  out.stats = domain.stats;

  double err[2] = {0, 0}, herr[2] = {0, 0}, norm[2] = {0, 0};
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    err[0] += (out.coarse_u[i] - out.fine_u[i]).squaredNorm();
    err[1] += (out.coarse_v[i] - out.fine_v[i]).squaredNorm();
    herr[0] += (out.hom_u[i] - out.fine_u[i]).squaredNorm();
    herr[1] += (out.hom_v[i] - out.fine_v[i]).squaredNorm();
    norm[0] += out.fine_u[i].squaredNorm();
    norm[1] += out.fine_v[i].squaredNorm();
  }
  for (int j = 0; j < 2; ++j) {
    out.rel_error[j] = norm[j] > 0.0 ? std::sqrt(err[j] / norm[j]) : 0.0;
    out.baseline_error[j] = norm[j] > 0.0 ? std::sqrt(herr[j] / norm[j]) : 0.0;
  }
  return out;
}

}  // namespace plim::elasto
