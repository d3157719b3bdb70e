#include "plim/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>
#include <map>
#include <ostream>

#include "plim/atlas/io.hpp"
#include "plim/cli/analysis.hpp"
#include "plim/cli/table.hpp"
#include "plim/core/coarse.hpp"
#include "plim/systems/systems.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace plim::cli {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Precondition:
    case ErrorKind::Config:
    case ErrorKind::UnknownSystem:
    case ErrorKind::CorruptFile:
    case ErrorKind::VersionMismatch:
      return kConfigError;
    case ErrorKind::SolverFailed:
    case ErrorKind::PrunedRegion:
    case ErrorKind::MissingSheet:
    case ErrorKind::NoCandidate:
    case ErrorKind::UnresolvableSingularity:
      return kSolverFailure;
    case ErrorKind::IntegrationDiverged:
    case ErrorKind::OutOfDomain:
      return kRunFailure;
  }
  return kRunFailure;
}

std::vector<std::string> variable_names(const std::string& system) {
  if (system == "lorenz") return {"x", "y", "z"};
  if (system == "hamiltonian4") return {"x1", "x2", "x3", "x4"};
  if (system == "oscillator") return {"x", "y"};
  throw Error(ErrorKind::UnknownSystem, "no fine variables for '" + system + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Config, "cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Piecewise-linear sample of (t, states) at time s; repeated times are fine.
Vec sample(const std::vector<double>& t, const std::vector<Vec>& states, double s) {
  if (s <= t.front()) return states.front();
  if (s >= t.back()) return states.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), s) - t.begin());
  const double span = t[k] - t[k - 1];
  if (span <= 0.0) return states[k];
  const double a = (s - t[k - 1]) / span;
  return (1.0 - a) * states[k - 1] + a * states[k];
}

json vec_json(const Vec& v) { return std::vector<double>(v.begin(), v.end()); }

std::string objective_histogram(const std::vector<double>& objectives) {
  if (objectives.empty()) return "  (no sheets)\n";
  std::map<int, int> bins;
  for (double o : objectives) bins[o > 0.0 ? static_cast<int>(std::floor(std::log10(o))) : -99]++;
  std::string s;
  for (const auto& [b, n] : bins) {
    s += b == -99 ? "  objective = 0" : "  1e" + std::to_string(b) + " <= objective < 1e" + std::to_string(b + 1);
    s += ": " + std::to_string(n) + "\n";
  }
  return s;
}

std::vector<BlockIndex> listed_blocks(const RunConfig& config) {
  std::vector<BlockIndex> blocks;
  for (const auto& b : config.atlas.blocks) blocks.push_back(BlockIndex{{b[0], b[1]}});
  return blocks;
}

int run_elastowave(const RunConfig& config, std::ostream& log) {
  const fs::path out = prepare_out(config.out);
  const auto t0 = Clock::now();
  json summary{{"system", "elastowave"}, {"mode", config.elasto.mode}};
  if (config.elasto.mode == "subdomain") {
    const auto r = elasto::run_subdomain_experiment(subdomain_config(config));
    Table h{{"t", "u_coarse", "v_coarse", "u_fine", "v_fine", "u_hom", "v_hom"}, {}};
    for (std::size_t k = 0; k < r.t.size(); ++k)
      h.add_row({r.t[k], r.coarse[k](0), r.coarse[k](1), r.fine[k](0), r.fine[k](1), r.homogeneous[k](0),
                 r.homogeneous[k](1)});
    write_csv((out / "history.csv").string(), h);
    summary["dt_fine"] = r.dt_fine;
    summary["dt_coarse"] = config.elasto.sub_dt;
    summary["horizon"] = r.horizon;
    summary["sheets_solved"] = r.sheets_solved;
    summary["rel_error"] = {{"u_bar", r.rel_error[0]}, {"v_bar", r.rel_error[1]}};
    summary["homogeneous_error"] = {{"u_bar", r.baseline_error[0]}, {"v_bar", r.baseline_error[1]}};
    summary["flops"] = {{"fine", r.fine_flops}, {"coarse", r.coarse_flops}, {"manifold", r.manifold_flops}};
    summary["seconds"] = seconds_since(t0);
    write_json(out / "summary.json", summary);
    log << "subdomain: " << r.t.size() << " coarse samples, relative error u_bar " << r.rel_error[0] << ", v_bar "
        << r.rel_error[1] << " (homogeneous " << r.baseline_error[0] << ", " << r.baseline_error[1] << ")\n";
    return kOk;
  }

  const auto r = elasto::run_coupled_experiment(coupled_config(config));
  std::size_t centre = 0;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    if (std::abs(r.x[i] - 0.5 * config.elasto.length) < std::abs(r.x[centre] - 0.5 * config.elasto.length)) centre = i;
  Table h{{"t", "u_coarse", "v_coarse", "u_fine", "v_fine", "u_hom", "v_hom"}, {}};
  Table f{{"t", "x", "u_coarse", "v_coarse", "u_fine", "v_fine", "u_hom", "v_hom"}, {}};
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(centre);
    h.add_row({r.t[k], r.coarse_u[k](c), r.coarse_v[k](c), r.fine_u[k](c), r.fine_v[k](c), r.hom_u[k](c),
               r.hom_v[k](c)});
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      f.add_row({r.t[k], r.x[i], r.coarse_u[k](j), r.coarse_v[k](j), r.fine_u[k](j), r.fine_v[k](j), r.hom_u[k](j),
                 r.hom_v[k](j)});
    }
  }
  write_csv((out / "history.csv").string(), h);
  write_csv((out / "fields.csv").string(), f);
  summary["completed"] = r.completed;
  summary["message"] = r.message;
  summary["centre_node"] = r.x.empty() ? 0.0 : r.x[centre];
  summary["dt_fine"] = r.dt_fine;
  summary["dt_coarse"] = r.dt_coarse;
  summary["horizon"] = r.horizon;
  summary["planned_steps"] = r.planned_steps;
  summary["steps"] = r.stats.steps;
  summary["rel_error"] = {{"u_bar", r.rel_error[0]}, {"v_bar", r.rel_error[1]}};
  summary["homogeneous_error"] = {{"u_bar", r.baseline_error[0]}, {"v_bar", r.baseline_error[1]}};
  summary["flops"] = {{"fine", r.fine_flops}, {"coarse", r.coarse_flops}, {"manifold", r.manifold_flops}};
  summary["sheets"] = {{"solved", r.stats.sheets_solved},
                       {"reused", r.stats.sheets_reused},
                       {"family_lifts", r.stats.family_lifts},
                       {"clamped_lifts", r.stats.clamped_lifts}};
  summary["seconds"] = {{"fine", r.fine_seconds}, {"coarse", r.coarse_seconds}};
  write_json(out / "summary.json", summary);
  log << "coupled: " << r.stats.steps << "/" << r.planned_steps << " coarse steps, relative error u_bar "
      << r.rel_error[0] << ", v_bar " << r.rel_error[1] << " (homogeneous " << r.baseline_error[0] << ", "
      << r.baseline_error[1] << ")\n";
  if (!r.completed) {
    log << "run stopped: " << r.message << '\n';
    return kRunFailure;
  }
  return kOk;
}

EvolveConfig evolve_config(const RunConfig& config, const Atlas& atlas) {
  EvolveConfig ec;
  ec.dt = config.dt;
  ec.horizon = config.horizon;
  ec.supplemental = config.supplemental;
  ec.supplement_threshold = config.supplement_threshold;
  ec.gsolve = atlas.spec().gsolve;
  return ec;
}

void write_run_files(const fs::path& out, const CoarseRun& run, const FineTrajectory& lifted) {
  {
    std::ofstream f(out / "run.csv");
    write_run_csv(f, run, &lifted);
  }
  std::ofstream f(out / "transfers.csv");
  write_transfers_csv(f, run.transfers);
}

std::string plot_script(const std::string& system, const std::vector<std::string>& vars) {
  std::string names = "[";
  for (const auto& v : vars) names += "'" + v + "', ";
  names += "]";
  const std::string px = system == "lorenz" ? "x" : vars[0];
  const std::string py = system == "lorenz" ? "z" : vars[1];
  return R"(import os
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
names = )" + names + R"(

def load(name):
    return np.genfromtxt(os.path.join(here, name), delimiter=',', names=True)

fig, axes = plt.subplots(len(names), 1, sharex=True, figsize=(7, 2.2 * len(names)))
for ax, v in zip(axes, names):
    d = load(v + '_t.csv')
    ax.plot(d['t'], d['fine'], label='fine')
    ax.plot(d['t'], d['coarse'], '--', label='coarse')
    ax.set_ylabel(v)
axes[0].legend()
axes[-1].set_xlabel('t')
fig.tight_layout()
fig.savefig(os.path.join(here, 'trajectories.png'), dpi=150)

a = load('averages.csv')
fig, axes = plt.subplots(len(names), 2, sharex=True, figsize=(9, 2.2 * len(names)))
for row, v in zip(axes, names):
    for ax, kind in zip(row, ['', 'abs_']):
        ax.plot(a['t'], a['fine_' + kind + v], label='fine')
        ax.plot(a['t'], a['coarse_' + kind + v], '--', label='coarse')
        ax.set_ylabel(('|%s|' if kind else '%s') % v + ' avg')
axes[0][0].legend()
fig.tight_layout()
fig.savefig(os.path.join(here, 'averages.png'), dpi=150)

p = load('phase.csv')
fig, ax = plt.subplots(figsize=(5, 5))
ax.plot(p['fine_)" + px + R"('], p['fine_)" + py + R"('], lw=0.6, label='fine')
ax.plot(p['coarse_)" + px + R"('], p['coarse_)" + py + R"('], lw=0.6, label='coarse')
ax.set_xlabel(')" + px + R"(')
ax.set_ylabel(')" + py + R"(')
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(here, 'phase.png'), dpi=150)
)";
}

}  // namespace

int cmd_init(const std::string& path, std::ostream& log) {
  if (fs::exists(path)) throw Error(ErrorKind::Config, path + " exists; not overwriting");
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
  out << config_template();
  log << "wrote " << path << '\n';
  return kOk;
}

Atlas obtain_atlas(const RunConfig& config, std::ostream& log, BuildReport* report) {
  if (!config.atlas.path.empty()) {
    Atlas a = load_atlas(config.atlas.path);
    if (a.spec().system != config.system)
      throw Error(ErrorKind::Config, config.atlas.path + " holds a " + a.spec().system + " atlas");
    log << "atlas: " << a.size() << " sheets from " << config.atlas.path << '\n';
    return a;
  }
  const AtlasSpec spec = atlas_spec(config);
  if (config.atlas.generate == "exact") {
    // Both closed-form branches through the initial state on one block.
    AtlasSpec one = spec;
    one.block_size = {one.hi[0] - one.lo[0], 1.0};
    if (config.atlas.nodes.empty()) one.nodes = {601, 1};
    one.anchor_data.clear();
    Atlas a(one);
    const Vec f0 = config.initial_state();
    a.add_sheet(systems::exact_oscillator_sheet(f0(0), f0(1), a.geometry({})));
    a.add_sheet(systems::exact_oscillator_sheet(f0(0), -f0(1), a.geometry({})));
    log << "atlas: exact oscillator branches through (" << f0(0) << ", " << f0(1) << ")\n";
    return a;
  }
  if (config.atlas.generate == "none") {
    log << "atlas: empty\n";
    return Atlas(spec);
  }
  BuildOptions options;
  options.seed = config.seed;
  if (config.atlas.generate == "listed") {
    options.blocks = listed_blocks(config);
    if (options.blocks.empty()) log << "warning: no blocks listed, the atlas is empty\n";
  }
  if (spec.anchor_data.empty()) log << "warning: empty anchor list, the atlas is empty\n";
  if (options.blocks.empty() && config.atlas.generate == "listed") return Atlas(spec);
  BuildReport local;
  BuildReport& rep = report ? *report : local;
  const auto t0 = Clock::now();
  Atlas a = build_atlas(spec, systems::bundle(config.system).geq, options, &rep);
  log << "atlas: " << rep.solved << " sheets solved, " << rep.failed << " failed, " << rep.degenerate
      << " degenerate of " << rep.attempted << " (" << seconds_since(t0) << " s)\n";
  return a;
}

int cmd_precompute(const RunConfig& config, const std::string& atlas_path, std::ostream& log) {
  config.validate();
  if (config.system == "elastowave")
    throw Error(ErrorKind::Config, "elastowave sheets are solved during the run; precompute does not apply");
  RunConfig c = config;
  c.atlas.path.clear();
  if (c.atlas.generate == "none") c.atlas.generate = "all";
  if (c.atlas.generate == "exact") throw Error(ErrorKind::Config, "exact atlases are built at run time");
  BuildReport report;
  const Atlas atlas = obtain_atlas(c, log, &report);
  log << "objective histogram:\n" << objective_histogram(report.objectives);
  for (const auto& f : report.failures) log << "  failed: " << f << '\n';
  if (config.atlas.failure_budget >= 0 && report.failed > static_cast<std::size_t>(config.atlas.failure_budget))
    throw Error(ErrorKind::SolverFailed, std::to_string(report.failed) + " failed solves exceed the budget of " +
                                             std::to_string(config.atlas.failure_budget));
  const std::string path = atlas_path.empty() ? (prepare_out(config.out) / "atlas.plim").string() : atlas_path;
  if (atlas_path.empty() == false) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) prepare_out(parent.string());
  }
  save_atlas(atlas, path);
  log << "wrote " << path << " (" << atlas.size() << " sheets)\n";
  return kOk;
}

int cmd_evolve(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.system == "elastowave") return run_elastowave(config, log);
  const fs::path out = prepare_out(config.out);
  const auto b = systems::bundle(config.system);
  Atlas atlas = obtain_atlas(config, log);
  const Vec f0 = config.initial_state();
  const auto t0 = Clock::now();
  const CoarseRun run = coarse_integrate(b.fine, b.projection, atlas, f0, evolve_config(config, atlas), &b.geq);
  const double secs = seconds_since(t0);
  const FineTrajectory lifted = lift_trajectory(run, atlas, b.projection);
  write_run_files(out, run, lifted);
  write_json(out / "summary.json", json{{"system", config.system},
                                        {"initial", vec_json(f0)},
                                        {"status", to_string(run.status)},
                                        {"message", run.message},
                                        {"t_end", run.t.empty() ? 0.0 : run.t.back()},
                                        {"steps", run.steps},
                                        {"transfers", run.transfers.size()},
                                        {"supplemental_solves", run.supplemental_solves},
                                        {"bridge_steps", run.bridge_steps},
                                        {"atlas_sheets", atlas.size()},
                                        {"seconds", secs}});
  log << "evolve: " << to_string(run.status) << " at t = " << (run.t.empty() ? 0.0 : run.t.back()) << ", "
      << run.transfers.size() << " transfers\n";
  if (run.status != RunStatus::Completed) {
    log << "run stopped: " << run.message << '\n';
    return run.status == RunStatus::SolverFailed ? kSolverFailure : kRunFailure;
  }
  return kOk;
}

int cmd_compare(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.system == "elastowave") return run_elastowave(config, log);
  const fs::path out = prepare_out(config.out);
  const auto b = systems::bundle(config.system);
  const auto vars = variable_names(config.system);
  Atlas atlas = obtain_atlas(config, log);
  const Vec f0 = config.initial_state();

  auto fine_future = std::async(std::launch::async, [&] {
    const auto t0 = Clock::now();
    FineTrajectory tr = fine_integrate(b.fine, f0, config.fine_dt, config.horizon);
    return std::make_pair(std::move(tr), seconds_since(t0));
  });
  const auto t0 = Clock::now();
  const CoarseRun run = coarse_integrate(b.fine, b.projection, atlas, f0, evolve_config(config, atlas), &b.geq);
  const double coarse_secs = seconds_since(t0);
  const FineTrajectory lifted = lift_trajectory(run, atlas, b.projection);
  write_run_files(out, run, lifted);

  FineTrajectory fine;
  double fine_secs = 0.0;
  std::string fine_error;
  try {
    std::tie(fine, fine_secs) = fine_future.get();
  } catch (const IntegrationDiverged& e) {
    fine_error = e.what();
  }
  json summary{{"system", config.system},
               {"preset", config.preset},
               {"initial", vec_json(f0)},
               {"status", to_string(run.status)},
               {"message", run.message},
               {"t_end", run.t.empty() ? 0.0 : run.t.back()},
               {"steps", run.steps},
               {"transfers", run.transfers.size()},
               {"supplemental_solves", run.supplemental_solves},
               {"atlas_sheets", atlas.size()},
               {"seconds", {{"fine", fine_secs}, {"coarse", coarse_secs}}}};
  if (!fine_error.empty()) {
    summary["fine_error"] = fine_error;
    write_json(out / "summary.json", summary);
    log << "fine run failed: " << fine_error << '\n';
    return kRunFailure;
  }

  // Trajectories at the coarse sample times.
  const std::size_t n = vars.size();
  std::vector<Table> traj(n, Table{{"t", "fine", "coarse"}, {}});
  Table phase;
  phase.columns = {"t"};
  for (const auto& v : vars) phase.columns.push_back("fine_" + v);
  for (const auto& v : vars) phase.columns.push_back("coarse_" + v);
  std::vector<double> err(n, 0.0), norm(n, 0.0);
  for (std::size_t k = 0; k < run.size(); ++k) {
    const Vec f = sample(fine.t, fine.states, run.t[k]);
    const Vec& c = lifted.states[k];
    std::vector<double> row{run.t[k]};
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<Eigen::Index>(i);
      traj[i].add_row({run.t[k], f(j), c(j)});
      row.push_back(f(j));
      if (k + 1 < run.size()) {
        const double w = run.t[k + 1] - run.t[k];
        err[i] += w * (c(j) - f(j)) * (c(j) - f(j));
        norm[i] += w * f(j) * f(j);
      }
    }
    for (std::size_t i = 0; i < n; ++i) row.push_back(c(static_cast<Eigen::Index>(i)));
    phase.add_row(std::move(row));
  }
  for (std::size_t i = 0; i < n; ++i) write_csv((out / (vars[i] + "_t.csv")).string(), traj[i]);
  write_csv((out / "phase.csv").string(), phase);

  // Running averages on a uniform grid over the common time span.
  Table avg;
  avg.columns = {"t"};
  for (const auto& v : vars)
    for (const char* kind : {"fine_", "coarse_", "fine_abs_", "coarse_abs_"}) avg.columns.push_back(kind + v);
  json final_averages = json::object();
  const double t_end = run.t.empty() ? 0.0 : std::min(run.t.back(), fine.t.back());
  const auto m = static_cast<std::size_t>(std::floor(t_end / config.dt + 1e-9)) + 1;
  if (!run.t.empty() && m >= 1) {
    std::vector<std::vector<double>> series(4 * n, std::vector<double>(m));
    for (std::size_t k = 0; k < m; ++k) {
      const double s = static_cast<double>(k) * config.dt;
      const Vec f = sample(fine.t, fine.states, s);
      const Vec c = sample(run.t, lifted.states, s);
      for (std::size_t i = 0; i < n; ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        series[4 * i][k] = f(j);
        series[4 * i + 1][k] = c(j);
        series[4 * i + 2][k] = std::abs(f(j));
        series[4 * i + 3][k] = std::abs(c(j));
      }
    }
    for (auto& s : series) s = running_average(s, config.dt);
    for (std::size_t k = 0; k < m; ++k) {
      std::vector<double> row{static_cast<double>(k) * config.dt};
      for (const auto& s : series) row.push_back(s[k]);
      avg.add_row(std::move(row));
    }
    for (std::size_t c = 1; c < avg.columns.size(); ++c) final_averages[avg.columns[c]] = series[c - 1].back();
  }
  write_csv((out / "averages.csv").string(), avg);

  // Self-intersections of the coarse (x, z) projection, or of the lifted
  // phase plane when the coarse space is one-dimensional.
  std::vector<double> px, py;
  for (std::size_t k = 0; k < run.size(); ++k) {
    if (b.projection.dim_coarse() >= 2) {
      px.push_back(run.coarse[k](0));
      py.push_back(run.coarse[k](1));
    } else {
      px.push_back(lifted.states[k](0));
      py.push_back(lifted.states[k](1));
    }
  }
  json rel = json::object();
  for (std::size_t i = 0; i < n; ++i) rel[vars[i]] = norm[i] > 0.0 ? std::sqrt(err[i] / norm[i]) : 0.0;
  summary["rel_l2"] = rel;
  summary["self_intersections"] = count_self_intersections(px, py);
  summary["running_averages_at_end"] = final_averages;
  write_json(out / "summary.json", summary);
  {
    std::ofstream f(out / "plot.py");
    f << plot_script(config.system, vars);
  }
  log << "compare: " << to_string(run.status) << " at t = " << t_end << ", " << run.transfers.size()
      << " transfers, " << summary["self_intersections"].get<std::size_t>() << " self-intersections\n";
  for (std::size_t i = 0; i < n; ++i) log << "  relative L2 " << vars[i] << ": " << rel[vars[i]].get<double>() << '\n';
  if (run.status != RunStatus::Completed) {
    log << "run stopped: " << run.message << '\n';
    return run.status == RunStatus::SolverFailed ? kSolverFailure : kRunFailure;
  }
  return kOk;
}

int cmd_average(const std::string& input, const std::string& output, std::ostream& log) {
  const Table in = read_csv(input);
  if (in.columns.size() < 2 || in.rows.size() < 2)
    throw Error(ErrorKind::Config, input + ": need a time column, one data column and two rows");
  const auto t = in.column(in.columns[0]);
  const double dt = t[1] - t[0];
  if (std::abs(t[0]) > 1e-12 * std::max(1.0, std::abs(dt)))
    throw Error(ErrorKind::Config, input + ": time must start at 0");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs(t[k] - t[k - 1] - dt) > 1e-6 * std::abs(dt))
      throw Error(ErrorKind::Config, input + ": time samples must be uniformly spaced");
  Table out;
  out.columns = {in.columns[0]};
  std::vector<std::vector<double>> series;
  for (std::size_t c = 1; c < in.columns.size(); ++c) {
    auto v = in.column(in.columns[c]);
    auto a = v;
    for (double& x : a) x = std::abs(x);
    out.columns.push_back("avg_" + in.columns[c]);
    series.push_back(running_average(v, dt));
    out.columns.push_back("avg_abs_" + in.columns[c]);
    series.push_back(running_average(a, dt));
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<double> row{t[k]};
    for (const auto& s : series) row.push_back(s[k]);
    out.add_row(std::move(row));
  }
  write_csv(output, out);
  log << "wrote " << output << " (" << series.size() << " averaged columns)\n";
  return kOk;
}

}  // namespace plim::cli
