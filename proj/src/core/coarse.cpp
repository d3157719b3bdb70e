#include "plim/core/coarse.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace plim {

const char* to_string(TransferReason r) {
  switch (r) {
    case TransferReason::BlockEdge: return "block-edge";
    case TransferReason::PruneEdge: return "prune-edge";
    case TransferReason::Singularity: return "singularity";
  }
  return "?";
}

TransferReason transfer_reason_from_string(const std::string& s) {
  if (s == "block-edge") return TransferReason::BlockEdge;
  if (s == "prune-edge") return TransferReason::PruneEdge;
  if (s == "singularity") return TransferReason::Singularity;
  throw Error(ErrorKind::Config, "unknown transfer reason '" + s + "'");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::OutOfDomain: return "out-of-domain";
    case RunStatus::NoCandidate: return "no-candidate";
    case RunStatus::UnresolvableSingularity: return "unresolvable-singularity";
    case RunStatus::SolverFailed: return "solver-failed";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::BridgeLimit: return "bridge-limit";
  }
  return "?";
}

namespace {

struct Stop {
  RunStatus status;
  std::string message;
};

class Driver {
 public:
  Driver(const FineSystem& sys, const ProjectionMap& proj, const Atlas& atlas, Atlas* writable,
         const EvolveConfig& cfg, const GEquation* geq)
      : sys_(sys), proj_(proj), atlas_(atlas), writable_(writable), cfg_(cfg), geq_(geq) {}

  CoarseRun run(const Vec& f0) {
    require(f0.size() == sys_.dim, "coarse_integrate: fine state dimension mismatch");
    require(cfg_.dt > 0.0 && cfg_.horizon >= 0.0, "coarse_integrate: need dt > 0 and horizon >= 0");
    require(!cfg_.supplemental || (writable_ && geq_), "coarse_integrate: supplemental mode needs a G-equation");
    try {
      Vec f = escape(f0);
      acquire(f, 0.0, kNoSheet, TransferReason::Singularity, false);
      march();
    } catch (const Stop& s) {
      run_.status = s.status;
      run_.message = s.message;
    } catch (const Error& e) {
      run_.status = RunStatus::SolverFailed;
      run_.message = e.what();
    }
    return std::move(run_);
  }

 private:
  void record(double t, const Vec& c, SheetId id, const Vec& fine) {
    run_.t.push_back(t);
    run_.coarse.push_back(c);
    run_.sheet.push_back(id);
    run_.fine.push_back(fine);
  }

  Vec escape(const Vec& f) {
    try {
      int n = 0;
      Vec out = escape_singularity(sys_, proj_, f, cfg_.sing_tol, cfg_.sing_eps, cfg_.max_retries, &n);
      run_.singular_perturbations += n;
      return out;
    } catch (const Error& e) {
      throw Stop{RunStatus::UnresolvableSingularity, e.what()};
    }
  }

  std::optional<Selection> choose(BlockIndex b, const Vec& f) {
    if (cfg_.supplemental) {
      try {
        const EnsureResult r = ensure_sheet(*writable_, b, f, sys_, proj_, *geq_, cfg_.gsolve,
                                            cfg_.supplement_threshold, cfg_.tie_tol);
        if (r.solved) ++run_.supplemental_solves;
        if (!atlas_.sheet(r.selection.id).defined_at(proj_.project(f))) return std::nullopt;
        return r.selection;
      } catch (const SolverFailed& e) {
        throw Stop{RunStatus::SolverFailed, e.what()};
      }
    }
    const Vec hint = sys_(f);
    return try_select_sheet(atlas_, b, f, sys_, proj_, &hint, cfg_.tie_tol);
  }

  // Places the run on a sheet at fine state f, taking fine micro-steps while
  // no sheet is usable.
  void acquire(Vec f, double t, SheetId from, TransferReason reason, bool log_event) {
    int bridged = 0;
    while (true) {
      const Vec c = proj_.project(f);
      if (!atlas_.in_domain(c)) throw Stop{RunStatus::OutOfDomain, "coarse state left the atlas domain"};
      const BlockIndex b = atlas_.block_of(c);
      if (auto sel = choose(b, f)) {
        state_.coarse = c;
        state_.sheet_id = sel->id;
        state_.t = t;
        block_ = b;
        record(t, c, sel->id, lift_point(proj_, atlas_.sheet(sel->id), c));
        if (log_event) run_.transfers.push_back({t, from, sel->id, reason});
        return;
      }
      if (!cfg_.supplemental && !has_candidates(atlas_, b)) {
        throw Stop{RunStatus::NoCandidate, "block (" + std::to_string(b.ij[0]) + "," + std::to_string(b.ij[1]) +
                                               ") has no sheets"};
      }
      if (bridged == cfg_.max_bridge_steps) {
        throw Stop{RunStatus::BridgeLimit, "no sheet became usable within the bridging budget"};
      }
      if (bridged > 0 || run_.t.empty() || run_.t.back() != t) record(t, c, kNoSheet, f);
      f = fine_step(f);
      t += cfg_.dt;
      ++bridged;
      ++run_.bridge_steps;
      if (t >= cfg_.horizon) {
        record(t, proj_.project(f), kNoSheet, f);
        state_.t = t;
        throw Stop{RunStatus::Completed, "horizon reached while bridging"};
      }
    }
  }

  Vec fine_step(const Vec& f) {
    Vec next = rk4_step(sys_.rhs, f, cfg_.dt);
    if (!next.allFinite()) throw Stop{RunStatus::Diverged, "fine micro-step produced a non-finite state"};
    return next;
  }

  // One RK4 step on the sheet; empty when a stage or the result leaves the
  // region where the sheet is defined.
  std::optional<Vec> try_step(const Sheet& s, const Vec& c, double h) const {
    const auto rate = [&](const Vec& x) -> std::optional<Vec> {
      const Vec y = s.geom.clamp(x);
      if (!s.defined_at(y)) return std::nullopt;
      return coarse_rhs(sys_, proj_, s, y);
    };
    const auto k1 = rate(c);
    if (!k1) return std::nullopt;
    const auto k2 = rate(c + 0.5 * h * *k1);
    if (!k2) return std::nullopt;
    const auto k3 = rate(c + 0.5 * h * *k2);
    if (!k3) return std::nullopt;
    const auto k4 = rate(c + h * *k3);
    if (!k4) return std::nullopt;
    Vec next = c + (h / 6.0) * (*k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
    if (!next.allFinite()) throw Stop{RunStatus::Diverged, "coarse step produced a non-finite state"};
    if (!s.geom.contains(next) || !s.defined_at(next)) return std::nullopt;
    return next;
  }

  void march() {
    const double T = cfg_.horizon;
    while (state_.t < T - 1e-12 * std::max(1.0, T)) {
      const Sheet& s = atlas_.sheet(state_.sheet_id);
      double h = std::min(cfg_.dt, T - state_.t);
      if (T - state_.t - cfg_.dt < 1e-9 * cfg_.dt) h = T - state_.t;
      if (auto next = try_step(s, state_.coarse, h)) {
        advance(s, *next, h);
        const Vec lift = run_.fine.back();
        if (detect_singularity(sys_, proj_, lift, cfg_.sing_tol)) {
          const Vec f = escape(lift);
          acquire(f, state_.t, state_.sheet_id, TransferReason::Singularity, true);
        }
        continue;
      }
      // Refine the exit point by bisection on the step fraction.
      double lo = 0.0, hi = 1.0;
      std::optional<Vec> best;
      while (hi - lo > cfg_.bisection_tol) {
        const double mid = 0.5 * (lo + hi);
        if (auto p = try_step(s, state_.coarse, mid * h)) {
          lo = mid;
          best = std::move(p);
        } else {
          hi = mid;
        }
      }
      if (best && lo > 0.0) advance(s, *best, lo * h);
      transfer(s);
    }
  }

  void advance(const Sheet& s, const Vec& c, double h) {
    state_.coarse = c;
    state_.t += h;
    ++run_.steps;
    record(state_.t, c, s.id, lift_point(proj_, s, c));
  }

  void transfer(const Sheet& s) {
    const Vec f = escape(lift_point(proj_, s, state_.coarse));
    const Vec f1 = fine_step(f);
    const Vec c1 = proj_.project(f1);
    if (!atlas_.in_domain(c1)) {
      state_.t += cfg_.dt;
      throw Stop{RunStatus::OutOfDomain, "coarse state left the atlas domain at t=" + std::to_string(state_.t)};
    }
    const TransferReason reason =
        atlas_.block_of(c1) == block_ ? TransferReason::PruneEdge : TransferReason::BlockEdge;
    acquire(f1, state_.t + cfg_.dt, s.id, reason, true);
  }

  const FineSystem& sys_;
  const ProjectionMap& proj_;
  const Atlas& atlas_;
  Atlas* writable_;
  const EvolveConfig& cfg_;
  const GEquation* geq_;
  CoarseRun run_;
  EvolutionState state_;
  BlockIndex block_;
};

}  // namespace

CoarseRun coarse_integrate(const FineSystem& sys, const ProjectionMap& proj, Atlas& atlas, const Vec& f0,
                           const EvolveConfig& config, const GEquation* geq) {
  return Driver(sys, proj, atlas, &atlas, config, geq).run(f0);
}

CoarseRun coarse_integrate(const FineSystem& sys, const ProjectionMap& proj, const Atlas& atlas, const Vec& f0,
                           const EvolveConfig& config) {
  require(!config.supplemental, "coarse_integrate: supplemental mode needs a writable atlas");
  return Driver(sys, proj, atlas, nullptr, config, nullptr).run(f0);
}

EvolutionState interblock_transfer(const Atlas& atlas, const FineSystem& sys, const ProjectionMap& proj,
                                   const EvolutionState& state, double dt, double tie_tol, double sing_tol,
                                   double sing_eps, int max_retries) {
  const Sheet& s = atlas.sheet(state.sheet_id);
  const Vec f = escape_singularity(sys, proj, lift_point(proj, s, state.coarse), sing_tol, sing_eps, max_retries);
  const Vec f1 = rk4_step(sys.rhs, f, dt);
  const Vec c1 = proj.project(f1);
  const Vec hint = sys(f1);
  const Selection sel = select_sheet(atlas, atlas.block_of(c1), f1, sys, proj, &hint, tie_tol);
  EvolutionState out;
  out.coarse = c1;
  out.sheet_id = sel.id;
  out.t = state.t + dt;
  out.lift = lift_point(proj, atlas.sheet(sel.id), c1);
  return out;
}

FineTrajectory lift_trajectory(const CoarseRun& run, const Atlas& atlas, const ProjectionMap& proj) {
  FineTrajectory out;
  out.t = run.t;
  out.states.reserve(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) {
    if (run.sheet[i] == kNoSheet) {
      if (i >= run.fine.size() || run.fine[i].size() == 0) {
        throw Error(ErrorKind::MissingSheet, "sample without sheet and without a stored fine state");
      }
      out.states.push_back(run.fine[i]);
    } else {
      out.states.push_back(lift_point(proj, atlas.sheet(run.sheet[i]), run.coarse[i]));
    }
  }
  return out;
}

namespace {

std::vector<double> fd_rate(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  std::vector<double> r(n, 0.0);
  if (n < 2) return r;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? n - 1 : i + 1;
    const double dt = t[b] - t[a];
    r[i] = dt > 0.0 ? (v[b] - v[a]) / dt : 0.0;
  }
  return r;
}

}  // namespace

RateCheck conserved_rate_check(const ConservedQuantity& q, const CoarseRun& run, const Atlas& atlas,
                               const FineSystem& sys, const ProjectionMap& proj) {
  (void)sys;
  const FineTrajectory lifted = lift_trajectory(run, atlas, proj);
  RateCheck rc;
  rc.t = run.t;
  for (std::size_t i = 0; i < run.size(); ++i) {
    rc.lifted_value.push_back(q.value(lifted.states[i]));
    rc.naive_value.push_back(q.value(proj.lift(run.coarse[i], Vec::Zero(proj.sheet_components()))));
  }
  rc.lifted_rate = fd_rate(rc.t, rc.lifted_value);
  rc.naive_rate = fd_rate(rc.t, rc.naive_value);
  return rc;
}

void write_run_csv(std::ostream& out, const CoarseRun& run, const FineTrajectory* lifted) {
  const std::size_t m = run.coarse.empty() ? 0 : static_cast<std::size_t>(run.coarse.front().size());
  const std::size_t n = lifted && !lifted->states.empty() ? static_cast<std::size_t>(lifted->states.front().size()) : 0;
  out << 't';
  for (std::size_t k = 1; k <= m; ++k) out << ",c_" << k;
  out << ",sheet_id";
  for (std::size_t k = 1; k <= n; ++k) out << ",f_" << k;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < run.size(); ++i) {
    out << run.t[i];
    for (std::size_t k = 0; k < m; ++k) out << ',' << run.coarse[i][static_cast<Eigen::Index>(k)];
    out << ',' << run.sheet[i];
    for (std::size_t k = 0; k < n; ++k) out << ',' << lifted->states[i][static_cast<Eigen::Index>(k)];
    out << '\n';
  }
}

void write_transfers_csv(std::ostream& out, const std::vector<TransferEvent>& events) {
  out << "t,from_sheet,to_sheet,reason\n" << std::setprecision(17);
  for (const auto& e : events) out << e.t << ',' << e.from << ',' << e.to << ',' << to_string(e.reason) << '\n';
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double to_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::CorruptFile, "csv: not a number '" + s + "'");
  }
}

}  // namespace

CoarseRun read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::CorruptFile, "csv: missing header");
  const auto header = split_csv(line);
  std::size_t m = 0, n = 0, sheet_col = 0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].rfind("c_", 0) == 0) ++m;
    if (header[i].rfind("f_", 0) == 0) ++n;
    if (header[i] == "sheet_id") sheet_col = i;
  }
  if (header.empty() || header[0] != "t" || sheet_col != m + 1) {
    throw Error(ErrorKind::CorruptFile, "csv: unexpected trajectory header");
  }
  CoarseRun run;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw Error(ErrorKind::CorruptFile, "csv: ragged row");
    run.t.push_back(to_double(cells[0]));
    Vec c(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) c[static_cast<Eigen::Index>(k)] = to_double(cells[1 + k]);
    run.coarse.push_back(c);
    run.sheet.push_back(static_cast<SheetId>(std::stoll(cells[sheet_col])));
    Vec f(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) f[static_cast<Eigen::Index>(k)] = to_double(cells[sheet_col + 1 + k]);
    run.fine.push_back(f);
  }
  return run;
}

std::vector<TransferEvent> read_transfers_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,from_sheet,to_sheet,reason") {
    throw Error(ErrorKind::CorruptFile, "csv: unexpected transfers header");
  }
  std::vector<TransferEvent> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw Error(ErrorKind::CorruptFile, "csv: ragged transfer row");
    out.push_back({to_double(cells[0]), static_cast<SheetId>(std::stoll(cells[1])),
                   static_cast<SheetId>(std::stoll(cells[2])), transfer_reason_from_string(cells[3])});
  }
  return out;
}

}  // namespace plim
