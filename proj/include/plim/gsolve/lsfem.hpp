#pragma once

#include <span>
#include <vector>

#include "plim/anneal.hpp"
#include "plim/atlas/sheet.hpp"
#include "plim/gsolve/gequation.hpp"

namespace plim {

enum class SolveMode { Real, Complex };

struct GSolveConfig {
  SolveMode mode = SolveMode::Real;
  int gauss = 2;                  // Gauss-Legendre points per element per direction
  double accept_threshold = -1;   // <0: 1e-4 * block measure
  double w_anchor_scale = 1e4;    // off-node anchor penalty weight per unit block measure
  double prune_tol = 0.2;
  double step_scale = -1;         // <0: 0.1 * max(1, |anchor data|_inf)
  int attempts = 1;               // independent seeds tried before giving up
  anneal::AnnealConfig anneal;

  double threshold_for(const BlockGeometry& g) const {
    return accept_threshold >= 0 ? accept_threshold : 1e-4 * g.measure();
  }
};

/// Least-squares finite-element discretisation of a G-equation on one block
/// with one point anchor.
///
/// The anchor is imposed by eliminating the anchor node's degrees of freedom
/// when it sits on a mesh node, otherwise through a quadratic penalty.
class LsfemProblem {
 public:
  LsfemProblem(BlockIndex block, BlockGeometry geom, GEquation geq, Anchor anchor, SolveMode mode,
               int gauss = 2, double w_anchor = -1);

  const BlockGeometry& geometry() const { return geom_; }
  const GEquation& equation() const { return geq_; }
  const Anchor& anchor() const { return anchor_; }
  const BlockIndex& block() const { return block_; }
  SolveMode mode() const { return mode_; }
  std::optional<int> anchor_node() const { return anchor_node_; }
  double anchor_weight() const { return w_anchor_; }

  std::size_t dof_count() const { return free_.size() * (mode_ == SolveMode::Complex ? 2 : 1); }

  /// Scatters a dof vector into nodal real/imaginary arrays (node-major).
  void expand(std::span<const double> dofs, std::vector<double>& re, std::vector<double>& im) const;
  /// Inverse of expand for the free entries.
  std::vector<double> gather(const std::vector<double>& re, const std::vector<double>& im) const;
  /// Dof vector of the constant field equal to the anchor data.
  std::vector<double> initial_guess() const;

  /// Quadrature sum of |residual|^2 plus the anchor penalty when active.
  double objective(std::span<const double> dofs) const;
  /// Same functional evaluated directly on nodal arrays.
  double objective_nodal(const std::vector<double>& re, const std::vector<double>& im) const;

 private:
  struct QuadPoint {
    std::array<double, 4> n;
    std::array<std::array<double, 2>, 4> dn;  // physical derivatives
    std::array<double, 2> offset;             // from element lower corner
    double weight;                            // includes Jacobian
  };

  template <class T>
  double element_sum(const std::vector<double>& re, const std::vector<double>& im) const;

  BlockIndex block_;
  BlockGeometry geom_;
  GEquation geq_;
  Anchor anchor_;
  SolveMode mode_;
  double w_anchor_;
  std::optional<int> anchor_node_;
  std::vector<int> free_;  // flat (node * nc + k) indices of free real unknowns
  std::vector<QuadPoint> quad_;
  std::vector<std::array<int, 4>> elem_nodes_;
  std::vector<std::array<double, 2>> elem_origin_;
};

/// Free-function form of the objective.
double assemble_objective(const LsfemProblem& problem, std::span<const double> dofs);

/// Raised when no attempt reaches the acceptance threshold.
class SolverFailed : public Error {
 public:
  SolverFailed(const std::string& what, Sheet best_sheet)
      : Error(ErrorKind::SolverFailed, what), best(std::move(best_sheet)) {}
  Sheet best;
};

struct SolveReport {
  double objective = 0.0;
  long evaluations = 0;
  int attempts = 0;
  std::vector<anneal::TracePoint> trace;
};

/// Minimises the objective by simplex annealing and returns the sheet.
/// Complex solves are pruned before returning.
Sheet solve_sheet(const LsfemProblem& problem, const GSolveConfig& config, SheetId id = kNoSheet,
                  SolveReport* report = nullptr);

/// Masks nodes where some component has |imag| > prune_tol * max(1, |real|).
/// A sheet with every node masked is flagged degenerate.
Sheet prune_complex(Sheet sheet, double prune_tol);

}  // namespace plim
