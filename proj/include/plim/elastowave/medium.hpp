#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "plim/core/fine_system.hpp"
#include "plim/parallel/omp.hpp"

namespace plim::elasto {

/// Floating-point operation tallies, split by where the work happens.
struct FlopCounter {
  std::atomic<std::int64_t> fine{0};      // fine rhs evaluations
  std::atomic<std::int64_t> coarse{0};    // coarse rhs evaluations (lifting, stress, assembly)
  std::atomic<std::int64_t> manifold{0};  // sheet marching

  void reset() {
    fine = 0;
    coarse = 0;
    manifold = 0;
  }
};

inline void tally(std::atomic<std::int64_t>* slot, std::int64_t n) {
  if (slot) slot->fetch_add(n, std::memory_order_relaxed);
}

/// 1-D bar with a periodic modulus law.
struct Medium1D {
  enum class Law { Cos, Sin, Constant };

  double length = 1.0;
  double rho = 1.0;
  double E0 = 1.0;
  double lambda_E = 1.0 / 16.0;
  Law law = Law::Cos;

  double modulus(double x) const;
  /// Exact integral of E over [a, b].
  double modulus_integral(double a, double b) const;
  /// Mean of E over [a, b].
  double mean_modulus(double a, double b) const { return modulus_integral(a, b) / (b - a); }
  /// Harmonic mean of E over a period, the long-wave effective modulus.
  double harmonic_modulus() const;
  /// Same bar with E replaced by the constant e.
  Medium1D homogeneous(double e) const;
};

enum class Boundary { Free, Fixed, Periodic, Acceleration };

/// Linear-element Galerkin matrices on a uniform mesh of [x0, x1].
///
/// The nodal dynamics are u' = v, v' = beta u + accel_o * a_o + accel_l * a_l.
/// For Free and Periodic meshes beta = M^-1 K. Fixed and Acceleration ends
/// prescribe the end accelerations (zero, or the given constants) and solve
/// the interior rows against them.
struct GalerkinOps {
  Boundary bc = Boundary::Free;
  int eta = 0;
  double x0 = 0.0;
  double x1 = 0.0;
  double h = 0.0;
  std::vector<double> x;  // node coordinates (periodic meshes omit x1)
  Mat M;
  Mat K;
  Mat beta;
  Vec accel_o;
  Vec accel_l;

  int elements() const { return bc == Boundary::Periodic ? eta : eta - 1; }
  std::pair<int, int> element_nodes(int e) const { return {e, (e + 1) % eta}; }
  Vec forcing(double a_o, double a_l) const;
};

GalerkinOps assemble_galerkin(const Medium1D& medium, double x0, double x1, int nodes_per_wavelength, Boundary bc);

/// Weights w with w . u = (1 / 2eps) * integral of u over [x - eps, x + eps].
Vec window_weights(const GalerkinOps& ops, double x, double eps);

/// psi_i = (1 / 2eps) * integral of phi_i over the whole mesh, which must
/// have length 2eps.
Vec averaging_weights(const GalerkinOps& ops, double eps);

/// Weights w with w . u = (1 / 2eps) * integral of E u_y over [x - eps, x + eps].
Vec stress_weights(const GalerkinOps& ops, const Medium1D& medium, double x, double eps);

double averaged_stress(const GalerkinOps& ops, const Medium1D& medium, const Vec& u, double x, double eps);

struct EndValues {
  double u_o = 0.0;
  double v_o = 0.0;
  double u_l = 0.0;
  double v_l = 0.0;
};

EndValues subdomain_boundary_estimate(double u, double v, double u_x, double v_x, double eps);

struct EndAccelerations {
  double a_o = 0.0;
  double a_l = 0.0;
};

/// Backward difference of the end velocities; zero without a cached step.
EndAccelerations end_accelerations(double v_o, double v_l, const double* v_o_prev, const double* v_l_prev,
                                   double dt);

/// Fine system (u, v) of dimension 2 eta. The parallel variant splits the
/// beta product into row blocks.
FineSystem galerkin_system(const GalerkinOps& ops, double a_o = 0.0, double a_l = 0.0,
                           FlopCounter* flops = nullptr, par::Exec exec = par::Exec::Serial);

/// Largest angular frequency of the undamped nodal dynamics.
double max_frequency(const GalerkinOps& ops);

}  // namespace plim::elasto
