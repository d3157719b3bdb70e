#include "plim/elastowave/coupled.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plim/error.hpp"

namespace plim::elasto {

namespace {

std::array<double, 3> shape(double xi) { return {0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)}; }
std::array<double, 3> shape_xi(double xi) { return {xi - 0.5, -2.0 * xi, xi + 0.5}; }

// Element matrix of integral c(x) N_a N_b (or N_a' N_b') with three-point Gauss.
Mat element_matrix(double h, double c, bool derivative) {
  const double gp[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  Mat out = Mat::Zero(3, 3);
  for (int q = 0; q < 3; ++q) {
    const auto n = derivative ? shape_xi(gp[q]) : shape(gp[q]);
    const double scale = derivative ? 2.0 / h : 1.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) out(a, b) += gw[q] * 0.5 * h * c * n[a] * n[b] * scale * scale;
    }
  }
  return out;
}

Mat assemble(const CoarseMesh& mesh, double c, bool derivative) {
  Mat out = Mat::Zero(mesh.nodes(), mesh.nodes());
  const Mat e = element_matrix(mesh.h(), c, derivative);
  for (int el = 0; el < mesh.elements; ++el) out.block(2 * el, 2 * el, 3, 3) += e;
  return out;
}

bool recoverable(const Error& e) {
  return e.kind() == ErrorKind::OutOfDomain || e.kind() == ErrorKind::PrunedRegion;
}

// Nearest point of the sheet where it is defined, measured relative to the
// block extent.
Vec nearest_defined(const Sheet& sheet, const Vec& c) {
  const BlockGeometry& g = sheet.geom;
  const double sx = g.hi[0] - g.lo[0];
  const double sy = g.hi[1] - g.lo[1];
  Vec best = g.clamp(c);
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < g.nodes[1]; ++j) {
    for (int i = 0; i + 1 < g.nodes[0]; ++i) {
      if (sheet.node_pruned(g.node_id(i, j)) || sheet.node_pruned(g.node_id(i + 1, j)) ||
          sheet.node_pruned(g.node_id(i, j + 1)) || sheet.node_pruned(g.node_id(i + 1, j + 1))) {
        continue;
      }
      const double x0 = g.lo[0] + i * g.spacing(0);
      const double y0 = g.lo[1] + j * g.spacing(1);
      Vec p(2);
      p << std::clamp(c(0), x0, x0 + g.spacing(0)), std::clamp(c(1), y0, y0 + g.spacing(1));
      const double d = std::hypot((p(0) - c(0)) / sx, (p(1) - c(1)) / sy);
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
  }
  if (!std::isfinite(best_d)) throw Error(ErrorKind::PrunedRegion, "sheet has no defined element");
  return best;
}

std::ptrdiff_t defined_elements(const Sheet& sheet) {
  const BlockGeometry& g = sheet.geom;
  std::ptrdiff_t out = 0;
  for (int j = 0; j + 1 < g.nodes[1]; ++j) {
    for (int i = 0; i + 1 < g.nodes[0]; ++i) {
      out += !(sheet.node_pruned(g.node_id(i, j)) || sheet.node_pruned(g.node_id(i + 1, j)) ||
               sheet.node_pruned(g.node_id(i, j + 1)) || sheet.node_pruned(g.node_id(i + 1, j + 1)));
    }
  }
  return out;
}

// Composite Simpson average of f over [a, b].
double average(const std::function<double(double)>& f, double a, double b) {
  constexpr int kIntervals = 64;
  const double h = (b - a) / kIntervals;
  double s = f(a) + f(b);
  for (int i = 1; i < kIntervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0 / (b - a);
}

}  // namespace

CoarseMesh quadratic_mesh(double length, int elements, double rho) {
  require(elements >= 1 && length > 0.0, "quadratic_mesh: need a positive length and at least one element");
  CoarseMesh mesh;
  mesh.elements = elements;
  mesh.length = length;
  mesh.M = assemble(mesh, rho, false);
  const int ni = mesh.nodes() - 2;
  mesh.interior_inverse = ni > 0 ? Mat(mesh.M.block(1, 1, ni, ni).inverse()) : Mat();
  const double g = 1.0 / std::sqrt(3.0);
  for (int el = 0; el < elements; ++el) {
    for (double xi : {-g, g}) {
      mesh.gauss.push_back({(el + 0.5 * (1.0 + xi)) * mesh.h(), 0.5 * mesh.h(), el, xi});
    }
  }
  return mesh;
}

GaussValues gauss_values(const CoarseMesh& mesh, const Vec& u, const Vec& v, int g) {
  const auto& gp = mesh.gauss[static_cast<std::size_t>(g)];
  const auto n = shape(gp.xi);
  const auto dn = shape_xi(gp.xi);
  const double jinv = 2.0 / mesh.h();
  GaussValues out;
  for (int a = 0; a < 3; ++a) {
    const int i = 2 * gp.element + a;
    out.u += n[a] * u(i);
    out.v += n[a] * v(i);
    out.u_x += dn[a] * jinv * u(i);
    out.v_x += dn[a] * jinv * v(i);
  }
  return out;
}

std::array<double, 2> ManifoldStore::key_of(double a_o, double a_l) const {
  if (spacing <= 0.0) return {a_o, a_l};
  return {spacing * std::round(a_o / spacing), spacing * std::round(a_l / spacing)};
}

GaussSelection select_manifold_at_gauss(const SubDomain& sub, const ManifoldStore& store, const GaussValues& c,
                                        const Vec* previous, double dt, double tie_tol, FlopCounter* flops) {
  const int n = sub.eta();
  GaussSelection sel;
  sel.ends = subdomain_boundary_estimate(c.u, c.v, c.u_x, c.v_x, sub.eps);
  if (previous) {
    require(previous->size() == 2 * n, "select_manifold_at_gauss: previous state size mismatch");
    const double vo = (*previous)(n);
    const double vl = (*previous)(2 * n - 1);
    sel.accel = end_accelerations(sel.ends.v_o, sel.ends.v_l, &vo, &vl, dt);
  } else {
    sel.accel = end_accelerations(sel.ends.v_o, sel.ends.v_l, nullptr, nullptr, dt);
  }
  sel.key = store.key_of(sel.accel.a_o, sel.accel.a_l);

  std::atomic<std::int64_t>* slot = flops ? &flops->coarse : nullptr;
  double best_key = std::numeric_limits<double>::infinity();
  double best_anchor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < store.items.size(); ++i) {
    const Manifold& m = store.items[i];
    const double kd = std::hypot(m.a_o - sel.accel.a_o, m.a_l - sel.accel.a_l);
    tally(slot, 5);
    if (kd > best_key + tie_tol) continue;
    double ad = 0.0;
    if (previous) {
      ad = (m.sheet.anchor.data - *previous).norm();
      tally(slot, 3LL * 2 * n);
    }
    if (kd < best_key - tie_tol || ad < best_anchor) {
      best_key = kd;
      best_anchor = ad;
      sel.index = i;
    }
  }
  if (sel.index) {
    sel.key_distance = best_key;
    sel.anchor_distance = best_anchor;
  }
  return sel;
}

CoupledDomain make_coupled_domain(const Medium1D& medium, const CoupledConfig& config) {
  require(config.eps > 0.0, "make_coupled_domain: sub-domain half-width must be positive");
  CoupledDomain d;
  d.medium = medium;
  d.config = config;
  d.mesh = quadratic_mesh(medium.length, config.elements, medium.rho);
  d.sites.resize(d.mesh.gauss.size());
  par::for_each_index(config.exec, static_cast<std::ptrdiff_t>(d.sites.size()), [&](std::ptrdiff_t g) {
    auto& site = d.sites[static_cast<std::size_t>(g)];
    site.sub = make_subdomain(medium, d.mesh.gauss[static_cast<std::size_t>(g)].x, config.eps,
                              config.nodes_per_wavelength, Boundary::Acceleration);
    site.store.spacing = config.accel_spacing;
  });
  return d;
}

CoarseState coupled_initial_state(CoupledDomain& domain, const std::function<double(double)>& u0,
                                  const std::function<double(double)>& v0) {
  const CoarseMesh& mesh = domain.mesh;
  const double eps = domain.config.eps;
  CoarseState s{Vec::Zero(mesh.nodes()), Vec::Zero(mesh.nodes())};
  for (int i = 1; i + 1 < mesh.nodes(); ++i) {
    s.u(i) = average(u0, mesh.x(i) - eps, mesh.x(i) + eps);
    s.v(i) = average(v0, mesh.x(i) - eps, mesh.x(i) + eps);
  }
  for (std::size_t g = 0; g < domain.sites.size(); ++g) {
    auto& site = domain.sites[g];
    const int n = site.sub.eta();
    Vec f(2 * n);
    for (int k = 0; k < n; ++k) {
      f(k) = u0(site.sub.ops.x[static_cast<std::size_t>(k)]);
      f(n + k) = v0(site.sub.ops.x[static_cast<std::size_t>(k)]);
    }
    const GaussValues c = gauss_values(mesh, s.u, s.v, static_cast<int>(g));
    const Vec have = site.sub.coarse_of(f);
    const IcFamily fam = ic_family(site.sub, f);
    f.head(n) += (c.u - have(0)) * fam.u_dir;
    f.tail(n) += (c.v - have(1)) * fam.v_dir;
    site.cached = std::move(f);
    site.has_previous = false;
    site.store.items.clear();
  }
  domain.stats = {};
  domain.alpha.resize(0);
  return s;
}

CoarseState coupled_coarse_step(CoupledDomain& domain, const CoarseState& s, double dt, FlopCounter* flops) {
  require(dt > 0.0, "coupled_coarse_step: dt must be positive");
  const CoarseMesh& mesh = domain.mesh;
  const CoupledConfig& cfg = domain.config;
  const int nodes = mesh.nodes();
  const int ni = nodes - 2;
  const auto sites = static_cast<std::ptrdiff_t>(domain.sites.size());
  const auto count = static_cast<std::size_t>(sites);
  std::atomic<std::int64_t>* slot = flops ? &flops->coarse : nullptr;

  // Nodal accelerations from Gauss-point stresses.
  auto accelerations = [&](const std::vector<double>& sigma) {
    Vec force = Vec::Zero(nodes);
    for (std::size_t g = 0; g < sigma.size(); ++g) {
      const auto& gp = mesh.gauss[g];
      const auto dn = shape_xi(gp.xi);
      for (int a = 0; a < 3; ++a) force(2 * gp.element + a) -= gp.weight * sigma[g] * dn[a] * 2.0 / mesh.h();
    }
    Vec alpha = Vec::Zero(nodes);
    if (ni > 0) alpha.segment(1, ni).noalias() = mesh.interior_inverse * force.segment(1, ni);
    tally(slot, 12LL * static_cast<std::int64_t>(sigma.size()) + 2LL * ni * ni);
    return alpha;
  };
  auto stress = [&](std::size_t g, const Vec& f) {
    const SubDomain& sub = domain.sites[g].sub;
    tally(slot, 2LL * sub.eta());
    return sub.stress_w.dot(f.head(sub.eta()));
  };
  auto at_gauss = [&](const Vec& nodal, std::size_t g) {
    const auto& gp = mesh.gauss[g];
    const auto sh = shape(gp.xi);
    double out = 0.0;
    for (int a = 0; a < 3; ++a) out += sh[a] * nodal(2 * gp.element + a);
    return out;
  };

  if (domain.alpha.size() != nodes) {
    std::vector<double> sigma(count);
    for (std::size_t g = 0; g < count; ++g) sigma[g] = stress(g, domain.sites[g].cached);
    domain.alpha = accelerations(sigma);
  }

  // One sheet per site for the interval ending now, anchored at the fine
  // state cached at its start and kept fixed over the step.
  std::vector<std::size_t> chosen(count);
  std::vector<Vec> now(count);
  std::vector<std::uint8_t> solved(count, 0);
  std::vector<std::uint8_t> on_family(count, 0);
  std::vector<std::size_t> clamped(count, 0);
  std::vector<std::string> failure(count);
  std::vector<std::optional<IcFamily>> family(count);
  auto lift_at = [&](std::size_t g, const Vec& c) -> Vec {
    if (family[g]) {
      // Anchor slab: the cached state moved along its family to c.
      const GaussSite& site = domain.sites[g];
      const Vec at = site.sub.coarse_of(family[g]->anchor);
      const int n = site.sub.eta();
      Vec f = family[g]->anchor;
      f.head(n) += (c(0) - at(0)) * family[g]->u_dir;
      f.tail(n) += (c(1) - at(1)) * family[g]->v_dir;
      tally(slot, 4LL * n);
      return f;
    }
    const Manifold& m = domain.sites[g].store.items[chosen[g]];
    try {
      return lift(m, c, flops);
    } catch (const Error& e) {
      if (!recoverable(e)) throw;
    }
    ++clamped[g];
    return lift(m, nearest_defined(m.sheet, c), flops);
  };

  auto prepare = [&](std::size_t g) {
    GaussSite& site = domain.sites[g];
    const SubDomain& sub = site.sub;
    const int n = sub.eta();
    const GaussValues c = gauss_values(mesh, s.u, s.v, static_cast<int>(g));
    Vec cn(2);
    cn << c.u, c.v;
    const GaussSelection sel = select_manifold_at_gauss(sub, site.store, c, site.has_previous ? &site.cached : nullptr,
                                                        dt, cfg.tie_tol, flops);
    if (sel.index) {
      const Manifold& m = site.store.items[*sel.index];
      if (m.a_o == sel.key[0] && m.a_l == sel.key[1]) {
        try {
          const Vec on = lift(m, sub.coarse_of(site.cached), flops);
          tally(slot, 3LL * 2 * n);
          if ((on - site.cached).norm() <= cfg.reuse_tol * std::max(1e-12, site.cached.norm())) {
            chosen[g] = *sel.index;
            now[g] = lift_at(g, cn);
            return;
          }
        } catch (const Error& e) {
          if (!recoverable(e)) throw;
        }
      }
    }
    // Supplemental sheet through the cached fine state, wide enough for the
    // interval just ended and the coming step.
    const Vec from = sub.coarse_of(site.cached);
    const Vec b = sub.ops.forcing(sel.key[0], sel.key[1]);
    const double rv = sub.psi_beta.dot(site.cached.head(n)) + sub.psi.dot(b);
    const double rate[2] = {std::max(std::abs(c.v), std::abs(sub.psi.dot(site.cached.tail(n)))),
                            std::max(std::abs(at_gauss(domain.alpha, g)), std::abs(rv))};
    const double span = cfg.window * dt;
    const double scale[2] = {s.u.cwiseAbs().maxCoeff(), s.v.cwiseAbs().maxCoeff()};
    std::array<double, 2> hw{};
    for (int k = 0; k < 2; ++k) {
      const double floor = 0.05 * std::max(std::abs(cn(k)), cfg.floor_scale * scale[k]) + 1e-6;
      hw[static_cast<std::size_t>(k)] = std::max(std::abs(cn(k) - from(k)) + span * rate[k], floor);
    }
    // Points the step will visit, assuming the coarse rates hold.
    const double ahead[2] = {c.v, at_gauss(domain.alpha, g)};
    std::vector<Vec> visit{cn, cn, cn};
    for (int k = 0; k < 2; ++k) {
      visit[1](k) += 0.5 * dt * ahead[k];
      visit[2](k) += dt * ahead[k];
    }
    auto covered = [&](const Manifold& m) {
      return std::count_if(visit.begin(), visit.end(),
                           [&](const Vec& p) { return m.sheet.geom.contains(p, 0.0) && m.sheet.defined_at(p); });
    };
    // Time-like direction by rate first, then forced ones if the first sheet
    // misses a point the step will visit. Otherwise the sheet covering most
    // points, then the one with most defined elements, is kept.
    std::optional<Manifold> best;
    std::pair<std::ptrdiff_t, std::ptrdiff_t> best_score{-1, -1};
    for (int d : {-1, 1, 0}) {
      if (best && best->timelike == d) continue;
      MarchConfig mc = cfg.march;
      mc.timelike = d;
      try {
        Manifold m = solve_subdomain_manifold(sub, ic_family(sub, site.cached), hw, sel.key[0], sel.key[1], mc, flops);
        const std::pair<std::ptrdiff_t, std::ptrdiff_t> score{covered(m), defined_elements(m.sheet)};
        if (score.second == 0) continue;
        if (score > best_score) {
          best_score = score;
          best = std::move(m);
        }
        if (score.first == static_cast<std::ptrdiff_t>(visit.size())) break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SolverFailed) throw;
      }
    }
    if (!best) {
      // Nothing usable through the cached state: stay on its family.
      family[g] = ic_family(sub, site.cached);
      on_family[g] = 1;
      now[g] = lift_at(g, cn);
      return;
    }
    site.store.items.push_back(std::move(*best));
    chosen[g] = site.store.items.size() - 1;
    solved[g] = 1;
    now[g] = lift_at(g, cn);
  };

  // Stresses of the lifts at a stage point.
  auto stage = [&](const Vec& u, const Vec& v) {
    std::vector<double> sig(count);
    par::for_each_index(
        cfg.exec, sites,
        [&](std::ptrdiff_t gi) {
          const auto g = static_cast<std::size_t>(gi);
          const GaussValues c = gauss_values(mesh, u, v, static_cast<int>(g));
          Vec cc(2);
          cc << c.u, c.v;
          sig[g] = stress(g, lift_at(g, cc));
        },
        true);
    return sig;
  };

  par::for_each_index(
      cfg.exec, sites,
      [&](std::ptrdiff_t gi) {
        const auto g = static_cast<std::size_t>(gi);
        try {
          prepare(g);
        } catch (const Error& e) {
          failure[g] = e.what();
        }
      },
      true);
  for (std::size_t g = 0; g < count; ++g) {
    if (!failure[g].empty()) throw Error(ErrorKind::SolverFailed, "gauss point " + std::to_string(g) + ": " + failure[g]);
  }

  std::vector<double> sigma(count);
  for (std::size_t g = 0; g < count; ++g) sigma[g] = stress(g, now[g]);
  const Vec k1u = s.v;
  const Vec k1v = accelerations(sigma);
  const Vec k2u = s.v + 0.5 * dt * k1v;
  const Vec k2v = accelerations(stage(s.u + 0.5 * dt * k1u, k2u));
  const Vec k3u = s.v + 0.5 * dt * k2v;
  const Vec k3v = accelerations(stage(s.u + 0.5 * dt * k2u, k3u));
  const Vec k4u = s.v + dt * k3v;
  const Vec k4v = accelerations(stage(s.u + dt * k3u, k4u));
  CoarseState next;
  next.u = s.u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
  next.v = s.v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  next.u(0) = next.u(nodes - 1) = 0.0;
  next.v(0) = next.v(nodes - 1) = 0.0;
  if (!next.u.allFinite() || !next.v.allFinite()) throw Error(ErrorKind::SolverFailed, "coarse state diverged");
  for (std::size_t g = 0; g < count; ++g) {
    domain.sites[g].cached = std::move(now[g]);
    domain.sites[g].has_previous = true;
    ++(solved[g] ? domain.stats.sheets_solved : domain.stats.sheets_reused);
    domain.stats.family_lifts += on_family[g];
    domain.stats.clamped_lifts += clamped[g];
  }
  domain.alpha = k1v;
  ++domain.stats.steps;
  return next;
}

CoupledRun run_coupled(CoupledDomain& domain, const CoarseState& s0, double dt, double horizon, FlopCounter* flops) {
  require(dt > 0.0 && horizon > 0.0, "run_coupled: dt and horizon must be positive");
  CoupledRun run;
  run.t.push_back(0.0);
  run.states.push_back(s0);
  const std::size_t steps = step_count(dt, horizon);
  double t = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double h = std::min(dt, horizon - t);
    run.states.push_back(coupled_coarse_step(domain, run.states.back(), h, flops));
    t = k == steps ? horizon : t + h;
    run.t.push_back(t);
  }
  return run;
}

double coarse_max_frequency(const CoarseMesh& mesh, double e) {
  const int ni = mesh.nodes() - 2;
  require(ni > 0, "coarse_max_frequency: no interior nodes");
  const Mat k = assemble(mesh, e, true).block(1, 1, ni, ni);
  const Mat m = mesh.M.block(1, 1, ni, ni);
  const Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(k, m, Eigen::EigenvaluesOnly);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

Vec window_averages(const GalerkinOps& ops, const Vec& values, const std::vector<double>& xs, double eps) {
  require(values.size() == ops.eta, "window_averages: size mismatch");
  Vec out(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = window_weights(ops, xs[i], eps).dot(values);
  }
  return out;
}

}  // namespace plim::elasto
