#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace plim::anneal {

/// Schedule and simplex parameters for the simplex annealer.
///
/// The number of temperature levels is fixed by cooling and t_min_ratio alone,
/// so a zero starting temperature runs the same budget as pure downhill simplex.
struct AnnealConfig {
  bool auto_t0 = true;        // start at T0 = objective(x0)
  double t0 = 0.0;            // used when auto_t0 is false
  double cooling = 0.9;       // T <- cooling * T
  int iters_per_temp = 200;
  double t_min_ratio = 1e-8;  // T_min = t_min_ratio * T0
  int restarts = 3;           // extra passes restarted from the best point
  double step_scale = 1.0;    // initial simplex edge when step is empty
  std::vector<double> step;   // per-dof initial simplex edge
  double ftol = 1e-14;        // simplex spread at which a temperature level ends early
  long max_evaluations = 0;   // 0: unlimited
  std::uint64_t seed = 0;

  void validate() const;
};

struct TracePoint {
  int pass = 0;
  double temperature = 0.0;
  double best = 0.0;
  long evaluations = 0;
};

struct AnnealResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<TracePoint> trace;
  long evaluations = 0;
  bool aborted = false;  // non-finite objective met; x/f hold the best finite point
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes `objective` starting from x0 by downhill simplex with thermal
/// fluctuations on the vertex values (Metropolis-style acceptance of uphill
/// moves), cooling geometrically and restarting from the best point found.
/// Deterministic for a given config and seed.
AnnealResult minimize(const Objective& objective, std::vector<double> x0, const AnnealConfig& config);

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

}  // namespace plim::anneal
