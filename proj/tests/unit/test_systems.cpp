#include <doctest.h>

#include <cmath>

#include "plim/rng.hpp"
#include "plim/systems/systems.hpp"

using namespace plim;

namespace {

// Independent G-equation oracle for selection projections: DG * DPi[H] - H_eliminated
// evaluated from the fine vector field directly.
Vec generic_residual(const FineSystem& sys, const ProjectionMap& proj, const Vec& c, const Vec& g, const Mat& dg) {
  const Vec f = proj.lift(c, g);
  const Vec h = sys(f);
  return dg * proj.rate(h) - proj.eliminated_part(h);
}

Vec residual(const GEquation& geq, const Vec& c, const Vec& g, const Mat& dg) {
  std::vector<double> flat;
  for (int k = 0; k < dg.rows(); ++k) {
    for (int j = 0; j < dg.cols(); ++j) flat.push_back(dg(k, j));
  }
  const auto r = eval_residual(geq, std::vector<double>(c.begin(), c.end()), std::vector<double>(g.begin(), g.end()), flat);
  return Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(r.size()));
}

}  // namespace

TEST_CASE("lorenz: rhs at the first preset") {
  const auto sys = systems::lorenz();
  const Vec h = sys(Vec{{0.0, 2.0, 8.0}});
  CHECK(h[0] == doctest::Approx(20.0));
  CHECK(h[1] == doctest::Approx(-2.0));
  CHECK(h[2] == doctest::Approx(-64.0 / 3.0));
  CHECK(sys.param("r") == 25.0);
  CHECK_THROWS_AS(sys.param("rho"), Error);
}

TEST_CASE("lorenz: fixed points") {
  const auto fps = systems::lorenz_fixed_points();
  REQUIRE(fps.size() == 3);
  CHECK(fps[1][0] == doctest::Approx(8.0));
  CHECK(fps[1][1] == doctest::Approx(8.0));
  CHECK(fps[1][2] == doctest::Approx(24.0));
  CHECK(fps[2][0] == doctest::Approx(-8.0));
  const auto sys = systems::lorenz();
  for (const Vec& p : fps) CHECK(sys(p).norm() < 1e-12);
}

TEST_CASE("geq: Lorenz and Hamiltonian residuals equal the generic invariance residual") {
  struct Case {
    FineSystem sys;
    ProjectionMap proj;
    GEquation geq;
  };
  const std::vector<Case> cases = {
      {systems::lorenz(), systems::lorenz_projection(), systems::lorenz_geq()},
      {systems::hamiltonian4(), systems::hamiltonian_projection(), systems::hamiltonian_geq()},
  };
  CounterRng rng(17);
  for (const auto& k : cases) {
    for (int i = 0; i < 10; ++i) {
      Vec c(2), g(k.geq.n_components);
      Mat dg(k.geq.n_components, 2);
      for (auto& v : c) v = rng.uniform(-3, 3);
      for (auto& v : g) v = rng.uniform(-3, 3);
      for (Eigen::Index a = 0; a < dg.size(); ++a) dg.data()[a] = rng.uniform(-2, 2);
      CHECK((residual(k.geq, c, g, dg) - generic_residual(k.sys, k.proj, c, g, dg)).norm() < 1e-11);
    }
  }
}

TEST_CASE("geq: oscillator residual is the generic one up to sign") {
  const auto sys = systems::oscillator();
  const auto proj = systems::oscillator_projection();
  CounterRng rng(4);
  for (int i = 0; i < 10; ++i) {
    const Vec c{{rng.uniform(-2, 2)}}, g{{rng.uniform(-2, 2)}};
    const Mat dg{{rng.uniform(-2, 2)}};
    CHECK((residual(systems::oscillator_geq(), c, g, dg) + generic_residual(sys, proj, c, g, dg)).norm() < 1e-13);
  }
}

TEST_CASE("geq: Hamiltonian pointwise values") {
  const auto geq = systems::hamiltonian_geq();
  const Mat zero = Mat::Zero(2, 2);
  const Vec r1 = residual(geq, Vec{{0.0, 1.0}}, Vec{{0.0, 0.0}}, zero);
  CHECK(r1.norm() == 0.0);
  const Vec r2 = residual(geq, Vec{{1.0, 0.0}}, Vec{{1.0, 0.0}}, zero);
  CHECK(r2[1] == doctest::Approx(2.0));
}

TEST_CASE("hamiltonian: energy value and conservation") {
  const Vec h1 = systems::preset("H1").state;
  CHECK(systems::hamiltonian_energy(h1) == doctest::Approx(1.111328125).epsilon(1e-15));
  // dE/dt = grad E . H vanishes identically; check at random states.
  const auto sys = systems::hamiltonian4();
  CounterRng rng(8);
  for (int i = 0; i < 20; ++i) {
    Vec f(4);
    for (auto& v : f) v = rng.uniform(-2, 2);
    const Vec grad{{f[0] * (1 + f[2] * f[2]), f[1], f[2] * (1 + f[0] * f[0]), f[3]}};
    CHECK(std::abs(grad.dot(sys(f))) < 1e-12);
  }
}

TEST_CASE("oscillator: exact sheets") {
  const BlockGeometry g{1, {-1.0, 0.0}, {1.0, 1.0}, {11, 1}};
  CHECK(sheet_eval(systems::exact_oscillator_sheet(0.0, 1.0, g), Vec{{0.6}})[0] == doctest::Approx(0.8));
  CHECK(sheet_eval(systems::exact_oscillator_sheet(0.0, -1.0, g), Vec{{0.6}})[0] == doctest::Approx(-0.8));
  const BlockGeometry wide{1, {-6.0, 0.0}, {6.0, 1.0}, {13, 1}};
  const Sheet s = systems::exact_oscillator_sheet(3.0, 4.0, wide);
  CHECK(sheet_eval(s, Vec{{5.0}})[0] == doctest::Approx(0.0));
  CHECK(s.node_pruned(0));
  CHECK_FALSE(s.node_pruned(1));
  CHECK(s.node_pruned(12));
  CHECK_THROWS_AS(systems::exact_oscillator_sheet(0.0, 0.0, g), Error);
  // y0 = 0 picks the branch the flow enters: x' = -y > 0 needs y < 0 below x0 < 0.
  CHECK(sheet_eval(systems::exact_oscillator_sheet(-1.0, 0.0, g), Vec{{0.0}})[0] == doctest::Approx(1.0));
  CHECK(sheet_eval(systems::exact_oscillator_sheet(1.0, 0.0, g), Vec{{0.0}})[0] == doctest::Approx(-1.0));
}

TEST_CASE("oscillator: exact sheet residual vanishes at unmasked quadrature points") {
  const BlockGeometry g{1, {-3.0, 0.0}, {3.0, 1.0}, {31, 1}};
  const Sheet s = systems::exact_oscillator_sheet(0.2, 1.0, g);
  const double r0 = std::sqrt(1.04);
  // The interpolant is piecewise linear; check the smooth field it samples instead.
  for (int n = 0; n < g.node_count(); ++n) {
    if (s.node_pruned(n)) {
      CHECK(std::abs(g.node_coords(n)[0]) > r0);
      continue;
    }
    const double x = g.node_coords(n)[0];
    CHECK(std::abs(s.value(n, 0) - std::sqrt(r0 * r0 - x * x)) < 1e-12);
  }
}

TEST_CASE("defaults: atlas specs follow the published set-ups") {
  const AtlasSpec l = systems::default_atlas_spec("lorenz");
  CHECK(l.block_count() == std::array<int, 2>{12, 12});
  CHECK(l.sheets_per_block() == 196);
  CHECK(l.geometry(BlockIndex{{6, 2}}).lo == std::array<double, 2>{0.0, 8.0});
  const AtlasSpec h = systems::default_atlas_spec("hamiltonian4");
  CHECK(h.lo == std::array<double, 2>{-2.0, -2.0});
  for (const Vec& d : h.anchor_data) CHECK(d.cwiseAbs().maxCoeff() <= 1.0);
  const AtlasSpec o = systems::default_atlas_spec("oscillator");
  CHECK(o.gsolve.mode == SolveMode::Complex);
  CHECK(o.lo[0] == -3.0);
  CHECK(o.hi[0] == 3.0);
  CHECK_THROWS_AS(systems::default_atlas_spec("duffing"), Error);
  try {
    systems::bundle("duffing");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownSystem);
  }
}

TEST_CASE("presets") {
  CHECK(systems::preset("L1").state == Vec{{0.0, 2.0, 8.0}});
  CHECK(systems::preset("C-Ex2").system == "oscillator");
  CHECK(systems::presets().size() == 8);
  CHECK_THROWS_AS(systems::preset("L9"), Error);
}
