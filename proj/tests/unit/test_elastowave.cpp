#include <doctest.h>

#include <cmath>
#include <numbers>

#include "plim/elastowave/coupled.hpp"
#include "plim/rng.hpp"

using namespace plim;
using namespace plim::elasto;

namespace {

Medium1D constant_medium(double e) {
  Medium1D m;
  m.law = Medium1D::Law::Constant;
  m.E0 = e;
  m.lambda_E = 1.0;
  return m;
}

Vec residual(const GEquation& geq, const Vec& c, const Vec& g, const Mat& dg) {
  std::vector<double> flat;
  for (int k = 0; k < dg.rows(); ++k) {
    for (int j = 0; j < dg.cols(); ++j) flat.push_back(dg(k, j));
  }
  const auto r = eval_residual(geq, std::vector<double>(c.begin(), c.end()), std::vector<double>(g.begin(), g.end()), flat);
  return Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(r.size()));
}

// Sheet over a 3x3 mesh of [lo, hi]^2 whose nodal values come from f(u_bar, v_bar).
Manifold sheet_from(const std::function<Vec(double, double)>& f, int components) {
  Manifold m;
  Sheet& s = m.sheet;
  s.geom.dim = 2;
  s.geom.nodes = {3, 3};
  s.geom.lo = {-1.0, -1.0};
  s.geom.hi = {1.0, 1.0};
  s.n_components = components;
  for (int node = 0; node < s.geom.node_count(); ++node) {
    const Vec c = s.geom.node_coords(node);
    const Vec v = f(c(0), c(1));
    s.values.insert(s.values.end(), v.data(), v.data() + components);
  }
  s.anchor = {Vec::Zero(2), f(0.0, 0.0)};
  return m;
}

}  // namespace

TEST_CASE("galerkin: hand assembly for constant E on two elements") {
  Medium1D m = constant_medium(1.5);
  const auto ops = assemble_galerkin(m, 0.0, 0.5, 4, Boundary::Free);
  REQUIRE(ops.eta == 3);
  const double h = 0.25;
  CHECK(ops.K(1, 1) == doctest::Approx(-2.0 * 1.5 / h));
  CHECK(ops.K(0, 1) == doctest::Approx(1.5 / h));
  CHECK(ops.K(1, 2) == doctest::Approx(1.5 / h));
  CHECK(ops.K(0, 2) == 0.0);
  CHECK(ops.M(1, 1) == doctest::Approx(4.0 * h / 6.0));
  CHECK(ops.M(0, 1) == doctest::Approx(h / 6.0));
}

TEST_CASE("galerkin: mass sums to rho L, stiffness symmetric with the rigid mode") {
  Medium1D m;
  m.rho = 2.5;
  m.lambda_E = 0.5;
  const auto ops = assemble_galerkin(m, 0.2, 1.7, 20, Boundary::Free);
  CHECK(ops.M.sum() == doctest::Approx(2.5 * 1.5));
  CHECK((ops.K - ops.K.transpose()).norm() < 1e-10);
  CHECK((ops.K * Vec::Ones(ops.eta)).norm() < 1e-9);
  CHECK((ops.beta * Vec::Ones(ops.eta)).norm() < 1e-8);
  const Eigen::SelfAdjointEigenSolver<Mat> es(ops.K);
  CHECK(es.eigenvalues().maxCoeff() < 1e-8);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(ops.M).eigenvalues().minCoeff() > 0.0);

  const auto acc = assemble_galerkin(m, 0.2, 1.7, 20, Boundary::Acceleration);
  CHECK((acc.beta * Vec::Ones(acc.eta)).norm() < 1e-8);
}

TEST_CASE("medium: modulus law values and bounds") {
  Medium1D m;
  m.E0 = 0.7;
  m.lambda_E = 0.3;
  CHECK(m.modulus(0.0) == doctest::Approx(2.1));
  CHECK(m.modulus(0.15) == doctest::Approx(0.7));
  for (double x = 0.0; x < 1.0; x += 0.013) {
    CHECK(m.modulus(x) >= 0.7 - 1e-12);
    CHECK(m.modulus(x) <= 2.1 + 1e-12);
  }
  CHECK(m.mean_modulus(0.0, 0.3) == doctest::Approx(1.4));
  m.law = Medium1D::Law::Sin;
  CHECK(m.modulus(0.075) == doctest::Approx(2.1));
}

TEST_CASE("averaging weights: hat integrals, constants and linear fields") {
  const double eps = 0.25;
  const auto ops = assemble_galerkin(constant_medium(1.0), 0.0, 2.0 * eps, 20, Boundary::Fixed);
  const Vec psi = averaging_weights(ops, eps);
  CHECK(psi.sum() == doctest::Approx(1.0));
  CHECK(psi(0) == doctest::Approx(ops.h / (4.0 * eps)));
  CHECK(psi(ops.eta - 1) == doctest::Approx(ops.h / (4.0 * eps)));
  for (int i = 1; i + 1 < ops.eta; ++i) CHECK(psi(i) == doctest::Approx(ops.h / (2.0 * eps)));
  CHECK(psi.dot(Vec::Constant(ops.eta, 3.2)) == doctest::Approx(3.2));
  const Vec y = Eigen::Map<const Vec>(ops.x.data(), ops.eta);
  CHECK(psi.dot(y) == doctest::Approx(eps));
}

TEST_CASE("geq: zero field and rigid translation are solutions") {
  Medium1D m = constant_medium(2.0);
  const auto fixed = make_subdomain(m, 0.5, 0.5, 8, Boundary::Fixed);
  const int n = fixed.eta();
  const GEquation geq = elastowave_geq(fixed);
  CounterRng rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    Vec c(2);
    c << rng.uniform(-1, 1), rng.uniform(-1, 1);
    CHECK(residual(geq, c, Vec::Zero(2 * n), Mat::Zero(2 * n, 2)).norm() == 0.0);
  }

  const auto free = make_subdomain(m, 0.5, 0.5, 8, Boundary::Free);
  const int nf = free.eta();
  REQUIRE((free.ops.beta * Vec::Ones(nf)).norm() < 1e-9);
  const GEquation gf = elastowave_geq(free);
  Vec c(2);
  c << 0.3, -0.8;
  Vec g(2 * nf);
  g.head(nf).setConstant(c(0));
  g.tail(nf).setConstant(c(1));
  Mat dg = Mat::Zero(2 * nf, 2);
  dg.col(0).head(nf).setOnes();
  dg.col(1).tail(nf).setOnes();
  CHECK(residual(gf, c, g, dg).norm() < 1e-9);
}

TEST_CASE("geq: three-node toy against the direct invariance residual") {
  Medium1D m;
  m.lambda_E = 1.0;
  const auto sub = make_subdomain(m, 0.25, 0.25, 4, Boundary::Fixed);
  REQUIRE(sub.eta() == 3);
  const auto sys = galerkin_system(sub.ops);
  const auto proj = sub.projection();
  const GEquation geq = elastowave_geq(sub);
  CounterRng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Vec c(2), g(6);
    Mat dg(6, 2);
    c << rng.uniform(-1, 1), rng.uniform(-1, 1);
    for (int k = 0; k < 6; ++k) {
      g(k) = rng.uniform(-1, 1);
      dg(k, 0) = rng.uniform(-1, 1);
      dg(k, 1) = rng.uniform(-1, 1);
    }
    const Vec h = sys(g);
    const Vec direct = dg * proj.rate(h) - h;
    CHECK((residual(geq, c, g, dg) - direct).norm() < 1e-12 * (1.0 + direct.norm()));
  }
}

TEST_CASE("subdomain: zero initial state gives the zero sheet") {
  Medium1D m;
  m.lambda_E = 1.0;
  const auto sub = make_subdomain(m, 0.5, 0.5, 8, Boundary::Fixed);
  const int n = sub.eta();
  const auto fam = ic_family(sub, Vec::Zero(2 * n));
  const Manifold man = solve_subdomain_manifold(sub, fam, {0.1, 0.1}, 0.0, 0.0, MarchConfig{});
  for (double v : man.sheet.values) CHECK(v == 0.0);
  Vec c(2);
  c << 0.05, -0.07;
  CHECK(coarse_subdomain_rhs(sub, man, c).norm() == 0.0);
}

TEST_CASE("subdomain: rigid sheet rhs and uniform velocity sheet") {
  const auto sub = make_subdomain(constant_medium(1.0), 0.5, 0.5, 8, Boundary::Free);
  const int n = sub.eta();
  const Manifold rigid = sheet_from(
      [n](double u, double v) {
        Vec g(2 * n);
        g.head(n).setConstant(u);
        g.tail(n).setConstant(v);
        return g;
      },
      2 * n);
  Vec c(2);
  c << 0.4, -0.6;
  const Vec r = coarse_subdomain_rhs(sub, rigid, c);
  CHECK(r(0) == doctest::Approx(-0.6));
  CHECK(std::abs(r(1)) < 1e-9);

  // u = c t, v = c for a uniform initial velocity.
  Vec f0 = Vec::Zero(2 * n);
  f0.tail(n).setConstant(0.8);
  const Manifold m = solve_subdomain_manifold(sub, ic_family(sub, f0), {0.05, 0.05}, 0.0, 0.0, MarchConfig{});
  CHECK(m.timelike == 0);
  for (double du : {-0.04, 0.0, 0.03}) {
    Vec p(2);
    p << du, 0.8;
    const Vec g = lift(m, p);
    for (int k = 0; k < n; ++k) {
      CHECK(g(n + k) == doctest::Approx(0.8).epsilon(1e-9));
      CHECK(g(k) == doctest::Approx(du).epsilon(1e-9));
    }
  }
}

TEST_CASE("subdomain: rhs at the anchor equals the direct coarse rates") {
  Medium1D m;
  m.lambda_E = 1.0;
  m.law = Medium1D::Law::Sin;
  const auto sub = make_subdomain(m, 1.0, 1.0, 10, Boundary::Acceleration);
  const int n = sub.eta();
  Vec f0 = Vec::Zero(2 * n);
  for (int k = 0; k < n; ++k) {
    f0(k) = 0.1 * std::cos(2.0 * sub.ops.x[static_cast<std::size_t>(k)]);
    f0(n + k) = std::sin(9.0 * std::numbers::pi * sub.ops.x[static_cast<std::size_t>(k)] / 4.0);
  }
  const double a_o = 0.3, a_l = -0.2;
  const Manifold man = solve_subdomain_manifold(sub, ic_family(sub, f0), {0.01, 0.01}, a_o, a_l, MarchConfig{});
  const Vec c = sub.coarse_of(f0);
  CHECK((lift(man, c) - f0).norm() < 1e-12 * (1.0 + f0.norm()));
  const Vec h = galerkin_system(sub.ops, a_o, a_l)(f0);
  const Vec direct = sub.projection().rate(h);
  const Vec via_sheet = coarse_subdomain_rhs(sub, man, c);
  CHECK((via_sheet - direct).norm() < 1e-10 * (1.0 + direct.norm()));
  CHECK(manifold_residual(sub, man) >= 0.0);
}

TEST_CASE("averaged stress: linear fields, constants, translation invariance") {
  const double a = 0.6;
  const auto ops = assemble_galerkin(constant_medium(2.5), 0.0, 1.0, 16, Boundary::Free);
  const Vec y = Eigen::Map<const Vec>(ops.x.data(), ops.eta);
  CHECK(averaged_stress(ops, constant_medium(2.5), a * y, 0.5, 0.25) == doctest::Approx(2.5 * a));
  CHECK(averaged_stress(ops, constant_medium(2.5), Vec::Constant(ops.eta, 4.0), 0.5, 0.25) == doctest::Approx(0.0));

  Medium1D cosm;
  cosm.E0 = 1.3;
  cosm.lambda_E = 1.0;
  const auto het = assemble_galerkin(cosm, 0.0, 1.0, 20, Boundary::Free);
  const Vec yh = Eigen::Map<const Vec>(het.x.data(), het.eta);
  CHECK(averaged_stress(het, cosm, a * yh, 0.5, 0.5) == doctest::Approx(2.0 * 1.3 * a));
  CHECK_THROWS_AS(averaged_stress(het, cosm, a * yh, 0.1, 0.2), Error);

  CounterRng rng(5);
  Vec u(het.eta);
  for (int k = 0; k < het.eta; ++k) u(k) = rng.uniform(-1, 1);
  CHECK(averaged_stress(het, cosm, u + Vec::Constant(het.eta, 7.0), 0.4, 0.3) ==
        doctest::Approx(averaged_stress(het, cosm, u, 0.4, 0.3)));
}

TEST_CASE("boundary estimates and end accelerations") {
  const auto e = subdomain_boundary_estimate(1.0, 2.0, 0.5, -1.0, 0.1);
  CHECK(e.u_o == doctest::Approx(0.95));
  CHECK(e.u_l == doctest::Approx(1.05));
  const auto z = subdomain_boundary_estimate(1.0, 2.0, 0.0, 0.0, 0.3);
  CHECK(z.u_o == z.u_l);
  CHECK(z.v_o == z.v_l);
  const auto v = subdomain_boundary_estimate(0.0, 2.0, 0.0, -1.0, 0.5);
  CHECK(v.v_o == doctest::Approx(2.5));
  CHECK(v.v_l == doctest::Approx(1.5));

  const double prev = 1.0;
  CHECK(end_accelerations(1.2, 1.0, &prev, &prev, 0.1).a_o == doctest::Approx(2.0));
  CHECK(end_accelerations(1.0, 1.0, &prev, &prev, 0.1).a_l == 0.0);
  const auto first = end_accelerations(1.2, 0.7, nullptr, nullptr, 0.1);
  CHECK(first.a_o == 0.0);
  CHECK(first.a_l == 0.0);
  CHECK_THROWS_AS(end_accelerations(1.0, 1.0, &prev, &prev, 0.0), Error);
}

TEST_CASE("selection: nearest key, then nearest anchor") {
  const auto sub = make_subdomain(constant_medium(1.0), 0.5, 0.1, 40, Boundary::Acceleration);
  const int n = sub.eta();
  ManifoldStore store;
  store.spacing = 2.0;
  auto add = [&](double a_o, double a_l, double level) {
    Manifold m;
    m.a_o = a_o;
    m.a_l = a_l;
    m.sheet.anchor.data = Vec::Constant(2 * n, level);
    store.items.push_back(m);
  };
  add(0.0, 0.0, 0.0);
  add(2.0, 2.0, 0.0);
  add(2.0, 2.0, 0.5);

  // Previous end velocities zero and dt = 1: accelerations are the Eq. 36 end velocities.
  const Vec prev = Vec::Zero(2 * n);
  GaussValues c;
  c.v = 2.0;
  c.v_x = -1.0;  // v_o = 2.1, v_l = 1.9
  auto sel = select_manifold_at_gauss(sub, store, c, &prev, 1.0);
  CHECK(sel.accel.a_o == doctest::Approx(2.1));
  CHECK(sel.accel.a_l == doctest::Approx(1.9));
  CHECK(sel.key == std::array<double, 2>{2.0, 2.0});
  REQUIRE(sel.index);
  CHECK(*sel.index == 1);

  const Vec near_second = Vec::Constant(2 * n, 0.4);
  c.v_x = 0.0;
  c.v = 2.0 + 0.4;  // v_o = v_l = 2.4, previous 0.4: exact key (2, 2)
  sel = select_manifold_at_gauss(sub, store, c, &near_second, 1.0);
  REQUIRE(sel.index);
  CHECK(*sel.index == 2);
  CHECK(sel.key_distance == doctest::Approx(0.0));

  CHECK_FALSE(select_manifold_at_gauss(sub, ManifoldStore{}, c, &prev, 1.0).index);
  CHECK(store.key_of(1.9, 2.1) == std::array<double, 2>{2.0, 2.0});
}

TEST_CASE("galerkin system: serial and parallel rhs agree") {
  Medium1D m;
  const auto ops = assemble_galerkin(m, 0.0, 1.0, 20, Boundary::Acceleration);
  FlopCounter fs, fp;
  const auto s = galerkin_system(ops, 0.4, -1.1, &fs, par::Exec::Serial);
  const auto p = galerkin_system(ops, 0.4, -1.1, &fp, par::Exec::Parallel);
  CounterRng rng(9);
  Vec f(2 * ops.eta);
  for (int k = 0; k < f.size(); ++k) f(k) = rng.uniform(-1, 1);
  const Vec rs = s(f);
  const Vec rp = p(f);
  CHECK((rs - rp).norm() < 1e-12 * rs.norm());
  CHECK(fs.fine.load() == fp.fine.load());
}

TEST_CASE("coarse mesh: quadratic elements and Gauss sites") {
  const CoarseMesh mesh = quadratic_mesh(1.0, 8, 1.3);
  CHECK(mesh.nodes() == 17);
  CHECK(mesh.M.sum() == doctest::Approx(1.3));
  REQUIRE(mesh.gauss.size() == 16);
  double w = 0.0;
  for (const auto& g : mesh.gauss) w += g.weight;
  CHECK(w == doctest::Approx(1.0));
  CHECK(mesh.gauss[0].x == doctest::Approx(0.0625 * (1.0 - 1.0 / std::sqrt(3.0))));

  // Quadratic fields are interpolated exactly.
  Vec u(17), v = Vec::Zero(17);
  for (int i = 0; i < 17; ++i) u(i) = mesh.x(i) * mesh.x(i);
  const auto gv = gauss_values(mesh, u, v, 5);
  CHECK(gv.u == doctest::Approx(mesh.gauss[5].x * mesh.gauss[5].x));
  CHECK(gv.u_x == doctest::Approx(2.0 * mesh.gauss[5].x));
}

TEST_CASE("coupled: zero state stays zero") {
  CoupledDomain d = make_coupled_domain(Medium1D{}, CoupledConfig{});
  CoarseState s = coupled_initial_state(d, [](double) { return 0.0; }, [](double) { return 0.0; });
  for (int k = 0; k < 3; ++k) s = coupled_coarse_step(d, s, 5e-3);
  CHECK(s.u.norm() == 0.0);
  CHECK(s.v.norm() == 0.0);
  CHECK(d.stats.steps == 3);
}

TEST_CASE("coupled: initial state from window averages") {
  CoupledDomain d = make_coupled_domain(Medium1D{}, CoupledConfig{});
  const double k = 8.0 * std::numbers::pi;
  const CoarseState s = coupled_initial_state(d, [](double) { return 0.0; }, [k](double x) { return std::sin(k * x); });
  const double eps = d.config.eps;
  for (int i = 1; i + 1 < d.mesh.nodes(); ++i) {
    CHECK(s.v(i) == doctest::Approx(std::sin(k * d.mesh.x(i)) * std::sin(k * eps) / (k * eps)).epsilon(1e-8));
  }
  for (std::size_t g = 0; g < d.sites.size(); ++g) {
    const auto gv = gauss_values(d.mesh, s.u, s.v, static_cast<int>(g));
    const Vec c = d.sites[g].sub.coarse_of(d.sites[g].cached);
    CHECK(c(1) == doctest::Approx(gv.v));
  }
}

// Runs about a minute; the sheet lift does not hold the standing wave over
// six periods (see the acceptance notes on the coupled run).
TEST_CASE("coupled: homogeneous standing wave at the centre node" * doctest::may_fail()) {
  Medium1D m;
  m.law = Medium1D::Law::Constant;
  CoupledDomain d = make_coupled_domain(m, CoupledConfig{});
  const double k = std::numbers::pi;
  const double omega = k * std::sqrt(m.E0 / m.rho);
  const double eps = d.config.eps;
  CoarseState s = coupled_initial_state(d, [](double) { return 0.0; }, [k](double x) { return std::sin(k * x); });
  const double dt = 2.8 / coarse_max_frequency(d.mesh, m.E0) / 4.0;
  const auto steps = static_cast<int>(std::ceil(6.0 * 2.0 * std::numbers::pi / omega / dt));
  const int centre = d.mesh.nodes() / 2;
  const double amp = std::sin(k * eps) / (k * eps) / omega;
  double worst = 0.0;
  try {
    for (int n = 1; n <= steps; ++n) {
      s = coupled_coarse_step(d, s, dt);
      worst = std::max(worst, std::abs(s.u(centre) - amp * std::sin(omega * n * dt)));
    }
  } catch (const Error& e) {
    FAIL("coupled run stopped: " << e.what());
  }
  MESSAGE("max centre error / amplitude " << worst / amp);
  CHECK(worst / amp <= 0.02);
}
