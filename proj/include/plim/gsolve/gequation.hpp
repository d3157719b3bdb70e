#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace plim {

using cplx = std::complex<double>;

/// Pointwise residual of the invariance PDE for the lift map of one system.
///
/// Arguments are the coarse point c (coarse_dim), the sheet values g
/// (n_components) and their gradients dg laid out as dg[k * coarse_dim + j]
/// = dG_k/dc_j. The residual has n_components entries.
struct GEquation {
  template <class T>
  using Fn = std::function<void(std::span<const double>, std::span<const T>, std::span<const T>, std::span<T>)>;

  std::string system;
  int n_components = 1;
  int coarse_dim = 1;
  Fn<double> real;
  Fn<cplx> complex;

  /// Builds both arithmetic variants from one generic callable
  /// f(c, g, dg, r) templated on the scalar type.
  template <class F>
  static GEquation make(std::string system, int n_components, int coarse_dim, F f) {
    GEquation g;
    g.system = std::move(system);
    g.n_components = n_components;
    g.coarse_dim = coarse_dim;
    g.real = [f](std::span<const double> c, std::span<const double> v, std::span<const double> dv,
                 std::span<double> r) { f(c, v, dv, r); };
    g.complex = [f](std::span<const double> c, std::span<const cplx> v, std::span<const cplx> dv,
                    std::span<cplx> r) { f(c, v, dv, r); };
    return g;
  }
};

/// Residual at one point (real arithmetic).
std::vector<double> eval_residual(const GEquation& geq, std::span<const double> c, std::span<const double> g,
                                  std::span<const double> dg);
/// Residual at one point (complex arithmetic).
std::vector<cplx> eval_residual(const GEquation& geq, std::span<const double> c, std::span<const cplx> g,
                                std::span<const cplx> dg);

}  // namespace plim
