#include "plim/elastowave/medium.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "plim/error.hpp"

namespace plim::elasto {

double Medium1D::modulus(double x) const {
  const double k = 2.0 * std::numbers::pi / lambda_E;
  switch (law) {
    case Law::Cos:
      return E0 * (2.0 + std::cos(k * x));
    case Law::Sin:
      return E0 * (2.0 + std::sin(k * x));
    case Law::Constant:
      return E0;
  }
  return E0;
}

double Medium1D::modulus_integral(double a, double b) const {
  const double k = 2.0 * std::numbers::pi / lambda_E;
  switch (law) {
    case Law::Cos:
      return E0 * (2.0 * (b - a) + (std::sin(k * b) - std::sin(k * a)) / k);
    case Law::Sin:
      return E0 * (2.0 * (b - a) - (std::cos(k * b) - std::cos(k * a)) / k);
    case Law::Constant:
      return E0 * (b - a);
  }
  return 0.0;
}

double Medium1D::harmonic_modulus() const {
  // 1 / mean(1 / (2 + cos)) = sqrt(3).
  return law == Law::Constant ? E0 : std::sqrt(3.0) * E0;
}

Medium1D Medium1D::homogeneous(double e) const {
  Medium1D m = *this;
  m.law = Law::Constant;
  m.E0 = e;
  return m;
}

Vec GalerkinOps::forcing(double a_o, double a_l) const {
  if (bc != Boundary::Acceleration) return Vec::Zero(eta);
  return a_o * accel_o + a_l * accel_l;
}

GalerkinOps assemble_galerkin(const Medium1D& medium, double x0, double x1, int nodes_per_wavelength,
                              Boundary bc) {
  require(nodes_per_wavelength >= 4, "assemble_galerkin: need at least 4 nodes per wavelength");
  require(x1 > x0, "assemble_galerkin: empty interval");
  const int n_el = std::max(1, static_cast<int>(std::lround((x1 - x0) / medium.lambda_E * nodes_per_wavelength)));
  require(bc != Boundary::Periodic || n_el >= 3, "assemble_galerkin: periodic mesh needs 3 elements");

  GalerkinOps ops;
  ops.bc = bc;
  ops.x0 = x0;
  ops.x1 = x1;
  ops.h = (x1 - x0) / n_el;
  ops.eta = bc == Boundary::Periodic ? n_el : n_el + 1;
  ops.x.resize(static_cast<std::size_t>(ops.eta));
  for (int i = 0; i < ops.eta; ++i) ops.x[static_cast<std::size_t>(i)] = x0 + i * ops.h;

  const int n = ops.eta;
  ops.M = Mat::Zero(n, n);
  ops.K = Mat::Zero(n, n);
  for (int e = 0; e < ops.elements(); ++e) {
    const auto [i, j] = ops.element_nodes(e);
    const double a = x0 + e * ops.h;
    const double m = medium.rho * ops.h / 6.0;
    const double k = medium.modulus_integral(a, a + ops.h) / (ops.h * ops.h);
    ops.M(i, i) += 2 * m;
    ops.M(j, j) += 2 * m;
    ops.M(i, j) += m;
    ops.M(j, i) += m;
    ops.K(i, i) -= k;
    ops.K(j, j) -= k;
    ops.K(i, j) += k;
    ops.K(j, i) += k;
  }

  ops.accel_o = Vec::Zero(n);
  ops.accel_l = Vec::Zero(n);
  if (bc == Boundary::Free || bc == Boundary::Periodic) {
    ops.beta = ops.M.llt().solve(ops.K);
    return ops;
  }

  // Ends prescribed: M_II a_I = K_I u - M_IB a_B.
  const int ni = n - 2;
  ops.beta = Mat::Zero(n, n);
  if (ni > 0) {
    const Mat mii = ops.M.block(1, 1, ni, ni);
    const Eigen::LLT<Mat> llt(mii);
    ops.beta.block(1, 0, ni, n) = llt.solve(ops.K.block(1, 0, ni, n));
    if (bc == Boundary::Acceleration) {
      ops.accel_o.segment(1, ni) = -llt.solve(ops.M.block(1, 0, ni, 1));
      ops.accel_l.segment(1, ni) = -llt.solve(ops.M.block(1, n - 1, ni, 1));
    }
  }
  if (bc == Boundary::Acceleration) {
    ops.accel_o(0) = 1.0;
    ops.accel_l(n - 1) = 1.0;
  }
  return ops;
}

namespace {

// Overlap of element e with [a, b] as a sub-interval, empty when none.
bool overlap(const GalerkinOps& ops, int e, double a, double b, double& lo, double& hi) {
  const double ea = ops.x0 + e * ops.h;
  lo = std::max(a, ea);
  hi = std::min(b, ea + ops.h);
  return hi > lo;
}

void check_window(const GalerkinOps& ops, double x, double eps) {
  const double tol = 1e-9 * ops.h;
  require(eps > 0.0, "window: half-width must be positive");
  if (x - eps < ops.x0 - tol || x + eps > ops.x1 + tol) {
    throw Error(ErrorKind::OutOfDomain, "window [" + std::to_string(x - eps) + ", " + std::to_string(x + eps) +
                                            "] leaves the mesh");
  }
}

}  // namespace

Vec window_weights(const GalerkinOps& ops, double x, double eps) {
  check_window(ops, x, eps);
  Vec w = Vec::Zero(ops.eta);
  for (int e = 0; e < ops.elements(); ++e) {
    double lo = 0, hi = 0;
    if (!overlap(ops, e, x - eps, x + eps, lo, hi)) continue;
    const auto [i, j] = ops.element_nodes(e);
    const double ea = ops.x0 + e * ops.h;
    // phi_j = s, phi_i = 1 - s with s = (y - ea) / h; integrate exactly.
    const double s0 = (lo - ea) / ops.h;
    const double s1 = (hi - ea) / ops.h;
    const double int_s = 0.5 * (s1 * s1 - s0 * s0) * ops.h;
    w(j) += int_s;
    w(i) += (hi - lo) - int_s;
  }
  return w / (2.0 * eps);
}

Vec averaging_weights(const GalerkinOps& ops, double eps) {
  require(std::abs((ops.x1 - ops.x0) - 2.0 * eps) <= 1e-9 * (ops.x1 - ops.x0),
          "averaging_weights: window must equal the sub-domain");
  return window_weights(ops, 0.5 * (ops.x0 + ops.x1), eps);
}

Vec stress_weights(const GalerkinOps& ops, const Medium1D& medium, double x, double eps) {
  check_window(ops, x, eps);
  Vec w = Vec::Zero(ops.eta);
  for (int e = 0; e < ops.elements(); ++e) {
    double lo = 0, hi = 0;
    if (!overlap(ops, e, x - eps, x + eps, lo, hi)) continue;
    const auto [i, j] = ops.element_nodes(e);
    const double ie = medium.modulus_integral(lo, hi) / ops.h;
    w(j) += ie;
    w(i) -= ie;
  }
  return w / (2.0 * eps);
}

double averaged_stress(const GalerkinOps& ops, const Medium1D& medium, const Vec& u, double x, double eps) {
  require(u.size() == ops.eta, "averaged_stress: displacement size mismatch");
  return stress_weights(ops, medium, x, eps).dot(u);
}

EndValues subdomain_boundary_estimate(double u, double v, double u_x, double v_x, double eps) {
  return {u - u_x * eps, v - v_x * eps, u + u_x * eps, v + v_x * eps};
}

EndAccelerations end_accelerations(double v_o, double v_l, const double* v_o_prev, const double* v_l_prev,
                                   double dt) {
  require(dt > 0.0, "end_accelerations: dt must be positive");
  if (!v_o_prev || !v_l_prev) return {};
  return {(v_o - *v_o_prev) / dt, (v_l - *v_l_prev) / dt};
}

FineSystem galerkin_system(const GalerkinOps& ops, double a_o, double a_l, FlopCounter* flops, par::Exec exec) {
  FineSystem sys;
  sys.name = "elastowave";
  sys.dim = 2 * ops.eta;
  const int n = ops.eta;
  auto b = std::make_shared<const Vec>(ops.forcing(a_o, a_l));
  std::atomic<std::int64_t>* slot = flops ? &flops->fine : nullptr;
  if (exec == par::Exec::Serial) {
    auto beta = std::make_shared<const Mat>(ops.beta);
    sys.rhs = [n, beta, b, slot](const Vec& f) {
      Vec r(2 * n);
      r.head(n) = f.tail(n);
      r.tail(n).noalias() = *beta * f.head(n);
      r.tail(n) += *b;
      tally(slot, 2LL * n * n + n);
      return r;
    };
    return sys;
  }
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  auto beta = std::make_shared<const RowMat>(ops.beta);
  sys.rhs = [n, beta, b, slot](const Vec& f) {
    constexpr int kRows = 32;
    Vec r(2 * n);
    r.head(n) = f.tail(n);
    const auto u = f.head(n);
    par::for_each_index(par::Exec::Parallel, (n + kRows - 1) / kRows, [&](std::ptrdiff_t blk) {
      const int lo = static_cast<int>(blk) * kRows;
      const int len = std::min(kRows, n - lo);
      r.segment(n + lo, len).noalias() = beta->middleRows(lo, len) * u;
      r.segment(n + lo, len) += b->segment(lo, len);
    });
    tally(slot, 2LL * n * n + n);
    return r;
  };
  return sys;
}

double max_frequency(const GalerkinOps& ops) {
  const Eigen::EigenSolver<Mat> es(ops.beta, false);
  double w2 = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) w2 = std::max(w2, -es.eigenvalues()(i).real());
  return std::sqrt(w2);
}

}  // namespace plim::elasto
