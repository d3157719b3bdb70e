#include "plim/elastowave/subdomain.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "plim/core/fine_system.hpp"
#include "plim/error.hpp"

namespace plim::elasto {

Vec SubDomain::coarse_of(const Vec& f) const {
  const int n = eta();
  require(f.size() == 2 * n, "coarse_of: fine state size mismatch");
  Vec c(2);
  c << psi.dot(f.head(n)), psi.dot(f.tail(n));
  return c;
}

ProjectionMap SubDomain::projection() const {
  const int n = eta();
  Mat w = Mat::Zero(2, 2 * n);
  w.block(0, 0, 1, n) = psi.transpose();
  w.block(1, n, 1, n) = psi.transpose();
  return ProjectionMap::weighted(w);
}

SubDomain make_subdomain(const Medium1D& medium, double center, double eps, int nodes_per_wavelength, Boundary bc) {
  SubDomain s;
  s.medium = medium;
  s.center = center;
  s.eps = eps;
  s.ops = assemble_galerkin(medium, center - eps, center + eps, nodes_per_wavelength, bc);
  s.psi = averaging_weights(s.ops, eps);
  s.stress_w = stress_weights(s.ops, medium, center, eps);
  s.psi_beta = s.ops.beta.transpose() * s.psi;
  s.omega_max = max_frequency(s.ops);
  return s;
}

GEquation elastowave_geq(const SubDomain& sub, double a_o, double a_l) {
  const int n = sub.eta();
  auto beta = std::make_shared<const Mat>(sub.ops.beta);
  auto psi = std::make_shared<const Vec>(sub.psi);
  auto b = std::make_shared<const Vec>(sub.ops.forcing(a_o, a_l));
  auto f = [n, beta, psi, b](std::span<const double>, auto g, auto dg, auto r) {
    using T = typename decltype(g)::value_type;
    std::vector<T> acc(static_cast<std::size_t>(n));
    T ru = 0.0, rv = 0.0;
    for (int k = 0; k < n; ++k) {
      T s = (*b)(k);
      for (int m = 0; m < n; ++m) s += (*beta)(k, m) * g[static_cast<std::size_t>(m)];
      acc[static_cast<std::size_t>(k)] = s;
      ru += (*psi)(k) * g[static_cast<std::size_t>(n + k)];
      rv += (*psi)(k) * s;
    }
    for (int k = 0; k < n; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const auto kv = static_cast<std::size_t>(n + k);
      r[ku] = dg[2 * ku] * ru + dg[2 * ku + 1] * rv - g[kv];
      r[kv] = dg[2 * kv] * ru + dg[2 * kv + 1] * rv - acc[ku];
    }
  };
  return GEquation::make("elastowave", 2 * n, 2, f);
}

IcFamily ic_family(const SubDomain& sub, Vec anchor) {
  const int n = sub.eta();
  require(anchor.size() == 2 * n, "ic_family: anchor size mismatch");
  Vec dir = Vec::Ones(n);
  if (sub.ops.bc == Boundary::Fixed && n > 2) {
    dir(0) = 0.0;
    dir(n - 1) = 0.0;
  }
  dir /= sub.psi.dot(dir);
  return {std::move(anchor), dir, dir};
}

namespace {

// Characteristics of the invariance equation are fine trajectories written
// with the time-like coarse coordinate s as parameter: dz/ds = H(z) / rate_d(z).
struct Characteristic {
  const SubDomain& sub;
  int n;
  Vec b;
  int d;
  double anchor_rate;
  double floor;
  std::atomic<std::int64_t>* slot;

  double rate(const Vec& z, int k) const {
    return k == 0 ? sub.psi.dot(z.tail(n)) : sub.psi_beta.dot(z.head(n)) + sub.psi.dot(b);
  }

  bool deriv(const Vec& z, Vec& out) const {
    const double r = rate(z, d);
    tally(slot, 2LL * n * n + 6LL * n);
    if (!std::isfinite(r) || r * anchor_rate <= 0.0 || std::abs(r) < floor) return false;
    out.resize(2 * n);
    out.head(n) = z.tail(n) / r;
    out.tail(n).noalias() = sub.ops.beta * z.head(n);
    out.tail(n) += b;
    out.tail(n) /= r;
    return true;
  }

  // Advances z by ds in RK4 substeps whose time span stays below dt_max.
  bool advance(Vec& z, double ds, double dt_max) const {
    const double r = std::abs(rate(z, d));
    const int m = std::max(1, static_cast<int>(std::ceil(std::abs(ds) / (r * dt_max))));
    if (m > 100000) return false;
    const double h = ds / m;
    Vec k1, k2, k3, k4;
    for (int s = 0; s < m; ++s) {
      if (!deriv(z, k1) || !deriv(z + 0.5 * h * k1, k2) || !deriv(z + 0.5 * h * k2, k3) ||
          !deriv(z + h * k3, k4)) {
        return false;
      }
      z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z.allFinite();
  }
};

std::optional<Manifold> march(const SubDomain& sub, const IcFamily& family, std::array<double, 2> half_width, int d,
                              double anchor_rate, const Vec& b, const MarchConfig& config, FlopCounter* flops,
                              std::string& why) {
  const int n = sub.eta();
  const int nf = 2 * n;
  const int t = 1 - d;
  const Vec ca = sub.coarse_of(family.anchor);
  Manifold out;
  out.timelike = d;
  Sheet& sheet = out.sheet;
  sheet.geom.dim = 2;
  sheet.geom.nodes = config.nodes;
  for (int k = 0; k < 2; ++k) {
    sheet.geom.lo[k] = ca(k) - half_width[k];
    sheet.geom.hi[k] = ca(k) + half_width[k];
  }
  sheet.n_components = nf;
  sheet.anchor = {ca, family.anchor};

  const int nd = config.nodes[static_cast<std::size_t>(d)];
  const int nt = config.nodes[static_cast<std::size_t>(t)];
  const double hd = sheet.geom.spacing(d);
  const double ht = sheet.geom.spacing(t);
  const double lo_t = sheet.geom.lo[static_cast<std::size_t>(t)];
  const double dt_max = config.omega_dt / std::max(sub.omega_max, 1e-300);

  const Characteristic ch{sub, n, b, d, anchor_rate, config.rate_floor * std::abs(anchor_rate),
                          flops ? &flops->manifold : nullptr};

  // Seeds on the family line through the anchor, the middle one at the anchor.
  const int per = std::max(1, config.seeds_per_cell);
  const int ns = per * (nt - 1) + 1;
  std::vector<Vec> seed(static_cast<std::size_t>(ns));
  for (int j = 0; j < ns; ++j) {
    const double off = lo_t + j * ht / per - ca(t);
    Vec z = family.anchor;
    if (j != (ns - 1) / 2) {
      if (t == 0) {
        z.head(n) += off * family.u_dir;
      } else {
        z.tail(n) += off * family.v_dir;
      }
    }
    seed[static_cast<std::size_t>(j)] = std::move(z);
  }

  // Slab values on the transverse grid by linear interpolation between the
  // characteristics that reached it; nodes outside their span are pruned.
  std::vector<Mat> slabs(static_cast<std::size_t>(nd));
  std::vector<std::vector<char>> ok(static_cast<std::size_t>(nd));
  auto resample = [&](int i, const std::vector<Vec>& zs, std::vector<char>& live) {
    // Keep the run of characteristics around the anchor one that is still
    // ordered in the transverse coordinate; beyond a fold the rest drop out.
    const int jc = (ns - 1) / 2;
    std::vector<double> p(static_cast<std::size_t>(ns), 0.0);
    for (int j = 0; j < ns; ++j) {
      if (live[static_cast<std::size_t>(j)]) p[static_cast<std::size_t>(j)] = sub.coarse_of(zs[static_cast<std::size_t>(j)])(t);
    }
    for (int step : {+1, -1}) {
      int last = jc;
      bool cut = false;
      for (int j = jc + step; j >= 0 && j < ns; j += step) {
        auto& lj = live[static_cast<std::size_t>(j)];
        if (!lj) continue;
        if (cut || (p[static_cast<std::size_t>(j)] - p[static_cast<std::size_t>(last)]) * step <= 0.0) {
          cut = true;
          lj = 0;
          continue;
        }
        last = j;
      }
    }
    std::vector<std::pair<double, int>> pts;
    for (int j = 0; j < ns; ++j) {
      if (live[static_cast<std::size_t>(j)]) pts.emplace_back(p[static_cast<std::size_t>(j)], j);
    }
    Mat slab = Mat::Zero(nf, nt);
    std::vector<char> has(static_cast<std::size_t>(nt), 0);
    std::size_t k = 0;
    for (int j = 0; j < nt && pts.size() >= 2; ++j) {
      const double q = lo_t + j * ht;
      const double tol = 1e-12 * ht;
      if (q < pts.front().first - tol || q > pts.back().first + tol) continue;
      while (k + 2 < pts.size() && pts[k + 1].first < q) ++k;
      const double a = std::clamp((q - pts[k].first) / (pts[k + 1].first - pts[k].first), 0.0, 1.0);
      slab.col(j) = (1.0 - a) * zs[static_cast<std::size_t>(pts[k].second)] +
                    a * zs[static_cast<std::size_t>(pts[k + 1].second)];
      has[static_cast<std::size_t>(j)] = 1;
    }
    slabs[static_cast<std::size_t>(i)] = std::move(slab);
    ok[static_cast<std::size_t>(i)] = std::move(has);
    return true;
  };

  const int ic = (nd - 1) / 2;
  const int jc = (ns - 1) / 2;
  std::vector<char> live0(static_cast<std::size_t>(ns), 1);
  for (int j = 0; j < ns; ++j) {
    Vec probe;
    if (!ch.deriv(seed[static_cast<std::size_t>(j)], probe)) live0[static_cast<std::size_t>(j)] = 0;
  }
  if (!live0[static_cast<std::size_t>(jc)]) {
    why = "time-like rate vanishes at the anchor";
    return std::nullopt;
  }
  resample(ic, seed, live0);
  // The anchor node keeps the anchor state exactly.
  slabs[static_cast<std::size_t>(ic)].col((nt - 1) / 2) = family.anchor;

  for (int dir : {+1, -1}) {
    std::vector<Vec> zs = seed;
    std::vector<char> live = live0;
    for (int i = ic + dir; i >= 0 && i < nd; i += dir) {
      for (int j = 0; j < ns; ++j) {
        if (live[static_cast<std::size_t>(j)] && !ch.advance(zs[static_cast<std::size_t>(j)], dir * hd, dt_max)) {
          live[static_cast<std::size_t>(j)] = 0;
        }
      }
      if (!live[static_cast<std::size_t>(jc)] || !resample(i, zs, live)) break;
    }
  }

  auto valid = [&](int i) { return slabs[static_cast<std::size_t>(i)].size() != 0; };
  if (!valid(ic - 1) && !valid(ic + 1)) {
    why = "march could not leave the initial line";
    return std::nullopt;
  }

  const int nn = sheet.geom.node_count();
  sheet.values.assign(static_cast<std::size_t>(nn * nf), 0.0);
  sheet.pruned.assign(static_cast<std::size_t>(nn), 0);
  bool any_pruned = false;
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int node = d == 0 ? sheet.geom.node_id(i, j) : sheet.geom.node_id(j, i);
      const bool good = valid(i) && ok[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (good) {
        const auto col = slabs[static_cast<std::size_t>(i)].col(j);
        std::copy(col.data(), col.data() + nf, sheet.values.begin() + static_cast<std::ptrdiff_t>(node) * nf);
      } else {
        // Pruned nodes hold the anchor so the values stay finite.
        std::copy(family.anchor.data(), family.anchor.data() + nf,
                  sheet.values.begin() + static_cast<std::ptrdiff_t>(node) * nf);
        sheet.pruned[static_cast<std::size_t>(node)] = 1;
        any_pruned = true;
      }
    }
  }
  if (!any_pruned) sheet.pruned.clear();
  sheet.objective = -1.0;
  return out;
}

}  // namespace

Manifold solve_subdomain_manifold(const SubDomain& sub, const IcFamily& family, std::array<double, 2> half_width,
                                  double a_o, double a_l, const MarchConfig& config, FlopCounter* flops) {
  const int n = sub.eta();
  const int nf = 2 * n;
  require(family.anchor.size() == nf, "solve_subdomain_manifold: anchor size mismatch");
  require(family.u_dir.size() == n && family.v_dir.size() == n, "solve_subdomain_manifold: family size mismatch");
  for (int k = 0; k < 2; ++k) {
    require(config.nodes[k] >= 3 && config.nodes[k] % 2 == 1, "solve_subdomain_manifold: node counts must be odd");
    require(half_width[k] > 0.0, "solve_subdomain_manifold: half-widths must be positive");
  }

  const Vec b = sub.ops.forcing(a_o, a_l);
  const double ru = sub.psi.dot(family.anchor.tail(n));
  const double rv = sub.psi.dot(sub.ops.beta * family.anchor.head(n) + b);
  if (ru == 0.0 && rv == 0.0) {
    const Vec acc = sub.ops.beta * family.anchor.head(n) + b;
    if (family.anchor.tail(n).cwiseAbs().maxCoeff() > 0.0 || acc.cwiseAbs().maxCoeff() > 0.0) {
      throw Error(ErrorKind::SolverFailed, "anchor is a stationary point of the coarse rates");
    }
    // Fine equilibrium: the constant sheet.
    Manifold m;
    m.a_o = a_o;
    m.a_l = a_l;
    Sheet& sheet = m.sheet;
    const Vec ca = sub.coarse_of(family.anchor);
    sheet.geom.dim = 2;
    sheet.geom.nodes = config.nodes;
    for (std::size_t k = 0; k < 2; ++k) {
      sheet.geom.lo[k] = ca(static_cast<Eigen::Index>(k)) - half_width[k];
      sheet.geom.hi[k] = ca(static_cast<Eigen::Index>(k)) + half_width[k];
    }
    sheet.n_components = nf;
    sheet.anchor = {ca, family.anchor};
    for (int node = 0; node < sheet.geom.node_count(); ++node) {
      sheet.values.insert(sheet.values.end(), family.anchor.data(), family.anchor.data() + nf);
    }
    return m;
  }
  int pref = std::abs(ru) / half_width[0] >= std::abs(rv) / half_width[1] ? 0 : 1;
  if (config.timelike >= 0) pref = config.timelike;
  // Preferred direction first with a narrowing transverse range, then the other one.
  std::string why = "time-like rate vanishes at the anchor";
  const int tries = config.timelike >= 0 ? 1 : 2;
  for (int attempt = 0; attempt < tries; ++attempt) {
    const int d = attempt == 0 ? pref : 1 - pref;
    const double rate = d == 0 ? ru : rv;
    if (rate == 0.0) continue;
    auto hw = half_width;
    const auto t = static_cast<std::size_t>(1 - d);
    // Characteristics through the anchor must stay inside the rectangle.
    hw[t] = std::max(hw[t], config.spread * std::abs((d == 0 ? rv : ru) / rate) * hw[static_cast<std::size_t>(d)]);
    for (int shrink = 0; shrink < 3; ++shrink, hw[t] *= 0.5) {
      if (auto m = march(sub, family, hw, d, rate, b, config, flops, why)) {
        m->a_o = a_o;
        m->a_l = a_l;
        return *m;
      }
    }
  }
  throw Error(ErrorKind::SolverFailed, why);
}

Vec lift(const Manifold& m, const Vec& c, FlopCounter* flops) {
  Vec z = sheet_eval(m.sheet, c);
  tally(flops ? &flops->coarse : nullptr, 8LL * m.sheet.n_components);
  return z;
}

Vec coarse_subdomain_rhs(const SubDomain& sub, const Manifold& m, const Vec& c, FlopCounter* flops) {
  const int n = sub.eta();
  const Vec g = lift(m, c, flops);
  Vec r(2);
  r << sub.psi.dot(g.tail(n)), sub.psi_beta.dot(g.head(n)) + sub.psi.dot(sub.ops.forcing(m.a_o, m.a_l));
  tally(flops ? &flops->coarse : nullptr, 8LL * n);
  return r;
}

double manifold_residual(const SubDomain& sub, const Manifold& m) {
  const GEquation geq = elastowave_geq(sub, m.a_o, m.a_l);
  const Sheet& s = m.sheet;
  const BlockGeometry& g = s.geom;
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  const double w = 0.25 * g.spacing(0) * g.spacing(1);
  double total = 0.0;
  for (int j = 0; j + 1 < g.nodes[1]; ++j) {
    for (int i = 0; i + 1 < g.nodes[0]; ++i) {
      if (s.node_pruned(g.node_id(i, j)) || s.node_pruned(g.node_id(i + 1, j)) ||
          s.node_pruned(g.node_id(i, j + 1)) || s.node_pruned(g.node_id(i + 1, j + 1))) {
        continue;
      }
      for (double px : gp) {
        for (double py : gp) {
          Vec c(2);
          c << g.lo[0] + (i + px) * g.spacing(0), g.lo[1] + (j + py) * g.spacing(1);
          const Vec v = sheet_eval(s, c);
          const Mat dg = sheet_grad(s, c);
          std::vector<double> flat(static_cast<std::size_t>(dg.size()));
          for (Eigen::Index k = 0; k < dg.rows(); ++k) {
            flat[static_cast<std::size_t>(2 * k)] = dg(k, 0);
            flat[static_cast<std::size_t>(2 * k + 1)] = dg(k, 1);
          }
          const auto r = eval_residual(geq, std::span<const double>(c.data(), 2),
                                       std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), flat);
          for (double x : r) total += w * x * x;
        }
      }
    }
  }
  return total;
}

std::array<double, 2> sheet_half_width(const SubDomain& sub, const Vec& f, double a_o, double a_l,
                                       std::array<double, 2> lower, double window) {
  const int n = sub.eta();
  const double ru = sub.psi.dot(f.tail(n));
  const double rv = sub.psi_beta.dot(f.head(n)) + sub.psi.dot(sub.ops.forcing(a_o, a_l));
  // Second derivatives of the coarse path keep the box useful near turning points.
  const double au = rv;
  const double av = sub.psi_beta.dot(f.tail(n));
  const double q = 0.5 * window * window;
  return {std::max(lower[0], window * std::abs(ru) + q * std::abs(au)),
          std::max(lower[1], window * std::abs(rv) + q * std::abs(av))};
}

SubdomainRun evolve_subdomain(const SubDomain& sub, const Vec& f0, const SubdomainRunConfig& config,
                              FlopCounter* flops) {
  require(config.dt > 0.0 && config.horizon > 0.0, "evolve_subdomain: dt and horizon must be positive");
  SubdomainRun run;
  Vec c = sub.coarse_of(f0);
  double t = 0.0;
  run.t.push_back(t);
  run.coarse.push_back(c);
  const std::size_t steps = step_count(config.dt, config.horizon);

  const FineSystem sys = galerkin_system(sub.ops, config.a_o, config.a_l);
  if (sys(f0).isZero(0.0)) {
    // Fine equilibrium: the coarse state never moves.
    for (std::size_t k = 1; k <= steps; ++k) {
      run.t.push_back(std::min(config.horizon, static_cast<double>(k) * config.dt));
      run.coarse.push_back(c);
    }
    return run;
  }

  auto solve = [&](const Vec& anchor, double grow = 1.0) {
    ++run.sheets_solved;
    const auto hw =
        sheet_half_width(sub, anchor, config.a_o, config.a_l, config.half_width, grow * config.window);
    return solve_subdomain_manifold(sub, ic_family(sub, anchor), hw, config.a_o, config.a_l, config.march, flops);
  };
  Manifold m = solve(f0);
  int fresh = 1;  // attempts made at the current anchor
  for (std::size_t k = 1; k <= steps;) {
    const double h = std::min(config.dt, config.horizon - t);
    Vec next;
    try {
      next = rk4_step([&](const Vec& x) { return coarse_subdomain_rhs(sub, m, x, flops); }, c, h);
      sheet_eval(m.sheet, next);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::OutOfDomain && e.kind() != ErrorKind::PrunedRegion) throw;
      // A step that leaves a fresh sheet retries with other sizes.
      static constexpr double kGrow[] = {1.0, 0.5, 2.0, 0.25, 4.0};
      if (fresh >= static_cast<int>(std::size(kGrow))) {
        throw Error(ErrorKind::SolverFailed, "coarse step leaves a freshly marched sheet at t=" + std::to_string(t));
      }
      const Vec anchor = fresh ? Vec(m.sheet.anchor.data) : lift(m, c);
      m = solve(anchor, kGrow[fresh]);
      ++fresh;
      run.transfer_t.push_back(t);
      continue;
    }
    fresh = 0;
    c = next;
    t = k == steps ? config.horizon : t + h;
    run.t.push_back(t);
    run.coarse.push_back(c);
    ++k;
  }
  return run;
}

}  // namespace plim::elasto
