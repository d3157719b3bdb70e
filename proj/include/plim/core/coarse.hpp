#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plim/atlas/atlas.hpp"
#include "plim/core/lift.hpp"

namespace plim {

enum class TransferReason { BlockEdge, PruneEdge, Singularity };
const char* to_string(TransferReason r);
TransferReason transfer_reason_from_string(const std::string& s);

struct TransferEvent {
  double t = 0.0;
  SheetId from = kNoSheet;
  SheetId to = kNoSheet;
  TransferReason reason = TransferReason::BlockEdge;
};

enum class RunStatus { Completed, OutOfDomain, NoCandidate, UnresolvableSingularity, SolverFailed, Diverged, BridgeLimit };
const char* to_string(RunStatus s);

struct EvolveConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  double tie_tol = 1e-9;
  double bisection_tol = 1e-8;  // fraction of a step
  double sing_tol = 1e-8;
  double sing_eps = 1e-4;
  int max_retries = 5;
  // Fine micro-steps allowed while no sheet is defined past a prune edge.
  int max_bridge_steps = 100000;
  // On-demand sheets: solved whenever the nearest sheet is farther than
  // supplement_threshold (or none is usable).
  bool supplemental = false;
  double supplement_threshold = 0.5;
  GSolveConfig gsolve;
};

/// Coarse trajectory with the active sheet per sample.
///
/// Samples with sheet kNoSheet were produced by fine micro-steps while no
/// sheet was defined; their fine state is kept in `fine`.
struct CoarseRun {
  std::vector<double> t;
  std::vector<Vec> coarse;
  std::vector<SheetId> sheet;
  std::vector<Vec> fine;  // lifted (or bridged) fine state per sample
  std::vector<TransferEvent> transfers;
  RunStatus status = RunStatus::Completed;
  std::string message;
  long steps = 0;
  long bridge_steps = 0;
  long supplemental_solves = 0;
  long singular_perturbations = 0;

  std::size_t size() const { return t.size(); }
};

/// Evolves the closed coarse theory from the fine initial state f0. Errors
/// during the run stop it early with a status; the partial run is returned.
/// With config.supplemental the atlas gains sheets; otherwise it is only read.
CoarseRun coarse_integrate(const FineSystem& sys, const ProjectionMap& proj, Atlas& atlas, const Vec& f0,
                           const EvolveConfig& config, const GEquation* geq = nullptr);

/// Read-only variant (supplemental mode must be off).
CoarseRun coarse_integrate(const FineSystem& sys, const ProjectionMap& proj, const Atlas& atlas, const Vec& f0,
                           const EvolveConfig& config);

/// Lifts a transfer state across a block or prune edge: one fine RK4 step of
/// length dt from G(c), then selection in the block of the new coarse point
/// with the fine rate as hint. Singular lifted states are perturbed first.
EvolutionState interblock_transfer(const Atlas& atlas, const FineSystem& sys, const ProjectionMap& proj,
                                   const EvolutionState& state, double dt, double tie_tol = 1e-9,
                                   double sing_tol = 1e-8, double sing_eps = 1e-4, int max_retries = 5);

/// Fine trajectory G(c(t)) using each sample's sheet.
FineTrajectory lift_trajectory(const CoarseRun& run, const Atlas& atlas, const ProjectionMap& proj);

struct RateCheck {
  std::vector<double> t;
  std::vector<double> lifted_value;
  std::vector<double> naive_value;
  std::vector<double> lifted_rate;  // DS(G(c))[H(G(c))]
  std::vector<double> naive_rate;   // finite difference of S with eliminated coordinates zeroed
};

RateCheck conserved_rate_check(const ConservedQuantity& q, const CoarseRun& run, const Atlas& atlas,
                               const FineSystem& sys, const ProjectionMap& proj);

/// CSV with columns t, c_1..c_m, sheet_id and, when given, f_1..f_n.
void write_run_csv(std::ostream& out, const CoarseRun& run, const FineTrajectory* lifted = nullptr);
void write_transfers_csv(std::ostream& out, const std::vector<TransferEvent>& events);
/// Reads back write_run_csv output (coarse columns and sheet ids; fine
/// columns into `fine` when present).
CoarseRun read_run_csv(std::istream& in);
std::vector<TransferEvent> read_transfers_csv(std::istream& in);

}  // namespace plim
