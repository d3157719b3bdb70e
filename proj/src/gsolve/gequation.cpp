#include "plim/gsolve/gequation.hpp"

#include "plim/error.hpp"

namespace plim {

namespace {

template <class T>
std::vector<T> residual_impl(const GEquation& geq, const GEquation::Fn<T>& fn, std::span<const double> c,
                             std::span<const T> g, std::span<const T> dg) {
  require(static_cast<int>(c.size()) == geq.coarse_dim, "residual: coarse dimension mismatch");
  require(static_cast<int>(g.size()) == geq.n_components, "residual: component count mismatch");
  require(static_cast<int>(dg.size()) == geq.n_components * geq.coarse_dim, "residual: gradient size mismatch");
  std::vector<T> r(static_cast<std::size_t>(geq.n_components));
  fn(c, g, dg, r);
  return r;
}

}  // namespace

std::vector<double> eval_residual(const GEquation& geq, std::span<const double> c, std::span<const double> g,
                                  std::span<const double> dg) {
  return residual_impl<double>(geq, geq.real, c, g, dg);
}

std::vector<cplx> eval_residual(const GEquation& geq, std::span<const double> c, std::span<const cplx> g,
                                std::span<const cplx> dg) {
  return residual_impl<cplx>(geq, geq.complex, c, g, dg);
}

}  // namespace plim
