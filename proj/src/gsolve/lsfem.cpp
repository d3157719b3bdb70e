#include "plim/gsolve/lsfem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plim {

namespace {

struct GaussRule {
  std::vector<double> x;  // on [0, 1]
  std::vector<double> w;  // sums to 1
};

GaussRule gauss_rule(int n) {
  GaussRule r;
  std::vector<double> pts, wts;
  switch (n) {
    case 1: pts = {0.0}; wts = {2.0}; break;
    case 2: pts = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}; wts = {1.0, 1.0}; break;
    case 3: pts = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)}; wts = {5.0 / 9, 8.0 / 9, 5.0 / 9}; break;
    case 4: {
      const double a = std::sqrt(3.0 / 7 - 2.0 / 7 * std::sqrt(6.0 / 5));
      const double b = std::sqrt(3.0 / 7 + 2.0 / 7 * std::sqrt(6.0 / 5));
      const double wa = (18 + std::sqrt(30.0)) / 36, wb = (18 - std::sqrt(30.0)) / 36;
      pts = {-b, -a, a, b};
      wts = {wb, wa, wa, wb};
      break;
    }
    default: throw Error(ErrorKind::Config, "lsfem: supported Gauss orders are 1..4");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r.x.push_back(0.5 * (pts[i] + 1.0));
    r.w.push_back(0.5 * wts[i]);
  }
  return r;
}

double sq(double v) { return v * v; }
double sq(cplx v) { return std::norm(v); }

}  // namespace

LsfemProblem::LsfemProblem(BlockIndex block, BlockGeometry geom, GEquation geq, Anchor anchor, SolveMode mode,
                           int gauss, double w_anchor)
    : block_(block), geom_(geom), geq_(std::move(geq)), anchor_(std::move(anchor)), mode_(mode) {
  geom_.validate();
  require(geq_.coarse_dim == geom_.dim, "lsfem: equation and block dimensions differ");
  require(anchor_.coarse.size() == geom_.dim, "lsfem: anchor dimension mismatch");
  require(anchor_.data.size() == geq_.n_components, "lsfem: anchor data size mismatch");
  require(geom_.contains(anchor_.coarse, 1e-12), "lsfem: anchor outside block");
  w_anchor_ = w_anchor >= 0 ? w_anchor : 1e4 * geom_.measure();
  anchor_node_ = geom_.node_at(anchor_.coarse, 1e-10);

  const int nc = geq_.n_components;
  for (int node = 0; node < geom_.node_count(); ++node) {
    if (anchor_node_ && *anchor_node_ == node) continue;
    for (int k = 0; k < nc; ++k) free_.push_back(node * nc + k);
  }

  const GaussRule rule = gauss_rule(gauss);
  const double hx = geom_.spacing(0);
  const double hy = geom_.dim == 2 ? geom_.spacing(1) : 1.0;
  const std::size_t nq = rule.x.size();
  for (std::size_t a = 0; a < nq; ++a) {
    for (std::size_t b = 0; b < (geom_.dim == 2 ? nq : 1); ++b) {
      QuadPoint q{};
      const double u = rule.x[a];
      if (geom_.dim == 1) {
        q.n = {1 - u, u, 0, 0};
        q.dn[0] = {-1 / hx, 0};
        q.dn[1] = {1 / hx, 0};
        q.offset = {u * hx, 0};
        q.weight = rule.w[a] * hx;
      } else {
        const double v = rule.x[b];
        q.n = {(1 - u) * (1 - v), u * (1 - v), u * v, (1 - u) * v};
        q.dn[0] = {-(1 - v) / hx, -(1 - u) / hy};
        q.dn[1] = {(1 - v) / hx, -u / hy};
        q.dn[2] = {v / hx, u / hy};
        q.dn[3] = {-v / hx, (1 - u) / hy};
        q.offset = {u * hx, v * hy};
        q.weight = rule.w[a] * rule.w[b] * hx * hy;
      }
      quad_.push_back(q);
    }
  }
  const int ex = geom_.nodes[0] - 1;
  const int ey = geom_.dim == 2 ? geom_.nodes[1] - 1 : 1;
  for (int j = 0; j < ey; ++j) {
    for (int i = 0; i < ex; ++i) {
      if (geom_.dim == 1) {
        elem_nodes_.push_back({i, i + 1, 0, 0});
        elem_origin_.push_back({geom_.lo[0] + i * hx, 0});
      } else {
        elem_nodes_.push_back(
            {geom_.node_id(i, j), geom_.node_id(i + 1, j), geom_.node_id(i + 1, j + 1), geom_.node_id(i, j + 1)});
        elem_origin_.push_back({geom_.lo[0] + i * hx, geom_.lo[1] + j * hy});
      }
    }
  }
}

void LsfemProblem::expand(std::span<const double> dofs, std::vector<double>& re, std::vector<double>& im) const {
  require(dofs.size() == dof_count(), "lsfem: dof vector length mismatch");
  const int nc = geq_.n_components;
  const std::size_t total = static_cast<std::size_t>(geom_.node_count() * nc);
  re.assign(total, 0.0);
  im.assign(mode_ == SolveMode::Complex ? total : 0, 0.0);
  if (anchor_node_) {
    for (int k = 0; k < nc; ++k) re[static_cast<std::size_t>(*anchor_node_ * nc + k)] = anchor_.data[k];
  }
  const std::size_t nf = free_.size();
  for (std::size_t i = 0; i < nf; ++i) re[static_cast<std::size_t>(free_[i])] = dofs[i];
  if (mode_ == SolveMode::Complex) {
    for (std::size_t i = 0; i < nf; ++i) im[static_cast<std::size_t>(free_[i])] = dofs[nf + i];
  }
}

std::vector<double> LsfemProblem::gather(const std::vector<double>& re, const std::vector<double>& im) const {
  std::vector<double> dofs;
  dofs.reserve(dof_count());
  for (int f : free_) dofs.push_back(re[static_cast<std::size_t>(f)]);
  if (mode_ == SolveMode::Complex) {
    for (int f : free_) dofs.push_back(im.empty() ? 0.0 : im[static_cast<std::size_t>(f)]);
  }
  return dofs;
}

std::vector<double> LsfemProblem::initial_guess() const {
  const int nc = geq_.n_components;
  std::vector<double> re(static_cast<std::size_t>(geom_.node_count() * nc));
  for (int node = 0; node < geom_.node_count(); ++node) {
    for (int k = 0; k < nc; ++k) re[static_cast<std::size_t>(node * nc + k)] = anchor_.data[k];
  }
  return gather(re, {});
}

template <class T>
double LsfemProblem::element_sum(const std::vector<double>& re, const std::vector<double>& im) const {
  const int nc = geq_.n_components;
  const int cd = geom_.dim;
  const int nn = geom_.dim == 2 ? 4 : 2;
  thread_local std::vector<T> g, dg, r;
  g.resize(static_cast<std::size_t>(nc));
  dg.resize(static_cast<std::size_t>(nc * cd));
  r.resize(static_cast<std::size_t>(nc));
  const auto& fn = [&]() -> const GEquation::Fn<T>& {
    if constexpr (std::is_same_v<T, double>) {
      return geq_.real;
    } else {
      return geq_.complex;
    }
  }();

  double total = 0.0;
  std::array<double, 2> c{};
  for (std::size_t e = 0; e < elem_nodes_.size(); ++e) {
    const auto& en = elem_nodes_[e];
    for (const QuadPoint& q : quad_) {
      std::fill(g.begin(), g.end(), T{});
      std::fill(dg.begin(), dg.end(), T{});
      for (int a = 0; a < nn; ++a) {
        const std::size_t base = static_cast<std::size_t>(en[static_cast<std::size_t>(a)] * nc);
        for (int k = 0; k < nc; ++k) {
          T v;
          if constexpr (std::is_same_v<T, double>) {
            v = re[base + static_cast<std::size_t>(k)];
          } else {
            v = T(re[base + static_cast<std::size_t>(k)], im[base + static_cast<std::size_t>(k)]);
          }
          g[static_cast<std::size_t>(k)] += q.n[static_cast<std::size_t>(a)] * v;
          for (int d = 0; d < cd; ++d) {
            dg[static_cast<std::size_t>(k * cd + d)] += q.dn[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)] * v;
          }
        }
      }
      c[0] = elem_origin_[e][0] + q.offset[0];
      c[1] = elem_origin_[e][1] + q.offset[1];
      fn(std::span<const double>(c.data(), static_cast<std::size_t>(cd)), g, dg, r);
      double s = 0.0;
      for (const T& v : r) s += sq(v);
      total += q.weight * s;
    }
  }

  if (!anchor_node_) {
    // Penalty on the interpolant at the anchor.
    Sheet probe;
    probe.geom = geom_;
    probe.n_components = nc;
    const auto hit = locate(probe, anchor_.coarse);
    for (int k = 0; k < nc; ++k) {
      T v{};
      for (int a = 0; a < hit->count; ++a) {
        const std::size_t idx = static_cast<std::size_t>(hit->node[static_cast<std::size_t>(a)] * nc + k);
        if constexpr (std::is_same_v<T, double>) {
          v += hit->weight[static_cast<std::size_t>(a)] * re[idx];
        } else {
          v += hit->weight[static_cast<std::size_t>(a)] * T(re[idx], im[idx]);
        }
      }
      total += w_anchor_ * sq(v - T(anchor_.data[k]));
    }
  }
  return total;
}

double LsfemProblem::objective_nodal(const std::vector<double>& re, const std::vector<double>& im) const {
  if (mode_ == SolveMode::Complex) return element_sum<cplx>(re, im);
  return element_sum<double>(re, im);
}

double LsfemProblem::objective(std::span<const double> dofs) const {
  thread_local std::vector<double> re, im;
  expand(dofs, re, im);
  return objective_nodal(re, im);
}

double assemble_objective(const LsfemProblem& problem, std::span<const double> dofs) {
  return problem.objective(dofs);
}

Sheet prune_complex(Sheet sheet, double prune_tol) {
  const int nn = sheet.geom.node_count();
  const int nc = sheet.n_components;
  sheet.pruned.assign(static_cast<std::size_t>(nn), 0);
  if (!sheet.imag.empty() && std::isfinite(prune_tol)) {
    for (int node = 0; node < nn; ++node) {
      for (int k = 0; k < nc; ++k) {
        const std::size_t i = static_cast<std::size_t>(node * nc + k);
        if (std::abs(sheet.imag[i]) > prune_tol * std::max(1.0, std::abs(sheet.values[i]))) {
          sheet.pruned[static_cast<std::size_t>(node)] = 1;
        }
      }
    }
  }
  sheet.degenerate = nn > 0 && sheet.pruned_count() == static_cast<std::size_t>(nn);
  if (sheet.pruned_count() == 0) sheet.pruned.clear();
  return sheet;
}

Sheet solve_sheet(const LsfemProblem& problem, const GSolveConfig& config, SheetId id, SolveReport* report) {
  const BlockGeometry& geom = problem.geometry();
  const Anchor& anchor = problem.anchor();
  const int nc = problem.equation().n_components;
  const double threshold = config.threshold_for(geom);

  const std::vector<double> x0 = problem.initial_guess();
  anneal::AnnealConfig acfg = config.anneal;
  if (acfg.step.empty()) {
    acfg.step_scale = config.step_scale > 0 ? config.step_scale
                                            : 0.1 * std::max(1.0, anchor.data.cwiseAbs().maxCoeff());
  }
  const auto objective = [&problem](std::span<const double> x) { return problem.objective(x); };

  anneal::AnnealResult best;
  best.f = std::numeric_limits<double>::infinity();
  SolveReport rep;
  for (int a = 0; a < std::max(1, config.attempts); ++a) {
    acfg.seed = config.anneal.seed + 0x9E3779B9ULL * static_cast<std::uint64_t>(a);
    anneal::AnnealResult res = anneal::minimize(objective, a == 0 ? x0 : best.x, acfg);
    rep.evaluations += res.evaluations;
    rep.attempts = a + 1;
    rep.trace.insert(rep.trace.end(), res.trace.begin(), res.trace.end());
    if (res.f < best.f) best = std::move(res);
    if (best.f <= threshold) break;
  }

  std::vector<double> re, im;
  problem.expand(best.x, re, im);
  Sheet sheet;
  sheet.id = id;
  sheet.block = problem.block();
  sheet.geom = geom;
  sheet.n_components = nc;
  sheet.anchor = anchor;

  if (!problem.anchor_node()) {
    // Shift by the anchor defect; interpolation weights sum to one, so the
    // shifted interpolant reproduces the data exactly.
    Sheet probe = sheet;
    probe.values = re;
    const Vec at = sheet_eval(probe, anchor.coarse);
    for (int node = 0; node < geom.node_count(); ++node) {
      for (int k = 0; k < nc; ++k) re[static_cast<std::size_t>(node * nc + k)] += anchor.data[k] - at[k];
    }
    if (!im.empty()) {
      probe.values = im;
      const Vec at_im = sheet_eval(probe, anchor.coarse);
      for (int node = 0; node < geom.node_count(); ++node) {
        for (int k = 0; k < nc; ++k) im[static_cast<std::size_t>(node * nc + k)] -= at_im[k];
      }
    }
  }
  sheet.values = re;
  sheet.objective = problem.objective_nodal(re, im);
  rep.objective = sheet.objective;
  if (problem.mode() == SolveMode::Complex) {
    sheet.imag = im;
    sheet = prune_complex(std::move(sheet), config.prune_tol);
  }
  if (report) *report = std::move(rep);
  if (!(sheet.objective <= threshold)) {
    throw SolverFailed("objective " + std::to_string(sheet.objective) + " above threshold " +
                           std::to_string(threshold),
                       std::move(sheet));
  }
  return sheet;
}

}  // namespace plim
