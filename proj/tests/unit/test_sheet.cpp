#include <doctest.h>

#include <cmath>

#include "plim/atlas/sheet.hpp"
#include "plim/rng.hpp"

using namespace plim;

namespace {

Sheet make_sheet(const BlockGeometry& g, int nc, const std::function<double(const Vec&, int)>& f) {
  Sheet s;
  s.geom = g;
  s.n_components = nc;
  for (int n = 0; n < g.node_count(); ++n) {
    for (int k = 0; k < nc; ++k) s.values.push_back(f(g.node_coords(n), k));
  }
  return s;
}

const BlockGeometry kBlock{2, {-4.0, 8.0}, {0.0, 12.0}, {6, 6}};

}  // namespace

TEST_CASE("sheet: constant field evaluates to the constant everywhere") {
  const Sheet s = make_sheet(kBlock, 1, [](const Vec&, int) { return 3.25; });
  CounterRng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Vec c{{rng.uniform(-4, 0), rng.uniform(8, 12)}};
    CHECK(sheet_eval(s, c)[0] == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(sheet_grad(s, c).norm() < 1e-13);
  }
}

TEST_CASE("sheet: node values are reproduced exactly and edges interpolate linearly") {
  const Sheet s = make_sheet(kBlock, 2, [](const Vec& c, int k) { return std::sin(c[0] + 2 * k) * c[1]; });
  for (int n = 0; n < kBlock.node_count(); ++n) {
    const Vec v = sheet_eval(s, kBlock.node_coords(n));
    CHECK(v[0] == s.value(n, 0));
    CHECK(v[1] == s.value(n, 1));
  }
  const int a = kBlock.node_id(2, 3), b = kBlock.node_id(3, 3);
  const Vec mid = 0.5 * (kBlock.node_coords(a) + kBlock.node_coords(b));
  CHECK(sheet_eval(s, mid)[0] == doctest::Approx(0.5 * (s.value(a, 0) + s.value(b, 0))));
}

TEST_CASE("sheet: bilinear fields are reproduced with zero interpolation error") {
  const auto field = [](const Vec& c) { return 1.5 - 0.25 * c[0] + 0.75 * c[1] + 0.125 * c[0] * c[1]; };
  const Sheet s = make_sheet(kBlock, 1, [&](const Vec& c, int) { return field(c); });
  CounterRng rng(9);
  for (int i = 0; i < 50; ++i) {
    const Vec c{{rng.uniform(-4, 0), rng.uniform(8, 12)}};
    CHECK(std::abs(sheet_eval(s, c)[0] - field(c)) < 1e-12);
  }
}

TEST_CASE("sheet: gradient of the x-coordinate field is (1, 0)") {
  const Sheet s = make_sheet(kBlock, 1, [](const Vec& c, int) { return c[0]; });
  const Mat g = sheet_grad(s, Vec{{-1.3, 9.7}});
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(g(0, 1)) < 1e-14);
}

TEST_CASE("sheet: gradient agrees with central differences") {
  const Sheet s = make_sheet(kBlock, 2, [](const Vec& c, int k) { return std::exp(0.1 * c[0]) * std::cos(c[1] + k); });
  CounterRng rng(11);
  int checked = 0;
  while (checked < 10) {
    const Vec c{{rng.uniform(-4, 0), rng.uniform(8, 12)}};
    const Mat g = sheet_grad(s, c);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
      Vec p = c, m = c;
      p[d] += h;
      m[d] -= h;
      const Vec fd = (sheet_eval(s, p) - sheet_eval(s, m)) / (2 * h);
      for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(fd[k] - g(k, d)) <= 1e-6 * std::max(1.0, std::abs(g(k, d))));
      }
    }
    ++checked;
  }
}

TEST_CASE("sheet: pruned nodes are never used") {
  const BlockGeometry g{1, {0.0, 0.0}, {4.0, 1.0}, {5, 1}};
  Sheet s = make_sheet(g, 1, [](const Vec& c, int) { return c[0]; });
  s.pruned = {0, 0, 0, 1, 0};
  CHECK(sheet_eval(s, Vec{{1.5}})[0] == doctest::Approx(1.5));
  // Node 2 sits between a usable and an unusable element.
  CHECK(sheet_eval(s, Vec{{2.0}})[0] == doctest::Approx(2.0));
  CHECK(s.defined_at(Vec{{2.0}}));
  CHECK_FALSE(s.defined_at(Vec{{2.5}}));
  CHECK_FALSE(s.defined_at(Vec{{3.5}}));
  try {
    sheet_eval(s, Vec{{3.2}});
    FAIL("expected pruned-region error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PrunedRegion);
  }
  try {
    sheet_eval(s, Vec{{4.5}});
    FAIL("expected out-of-domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
  }
}

TEST_CASE("block geometry: node lookup and clamping") {
  CHECK(kBlock.node_at(Vec{{-4.0, 8.0}}) == 0);
  CHECK(kBlock.node_at(Vec{{-3.2, 8.8}}) == kBlock.node_id(1, 1));
  CHECK_FALSE(kBlock.node_at(Vec{{-3.0, 8.0}}).has_value());
  CHECK(kBlock.clamp(Vec{{5.0, 7.0}}) == Vec{{0.0, 8.0}});
  CHECK(kBlock.measure() == doctest::Approx(16.0));
  BlockGeometry bad = kBlock;
  bad.nodes = {1, 6};
  CHECK_THROWS(bad.validate());
}
