#include "plim/core/lift.hpp"

namespace plim {

Vec lift_point(const ProjectionMap& proj, const Sheet& sheet, const Vec& c) {
  return proj.lift(c, sheet_eval(sheet, c));
}

Vec coarse_rhs(const FineSystem& sys, const ProjectionMap& proj, const Sheet& sheet, const Vec& c) {
  return proj.rate(sys(lift_point(proj, sheet, c)));
}

bool detect_singularity(const FineSystem& sys, const ProjectionMap& proj, const Vec& f, double tol) {
  const Vec h = sys(f);
  const double hn = h.norm();
  return hn > tol && proj.rate(h).norm() <= tol * hn;
}

Vec perturb_singular(const FineSystem& sys, const Vec& f, double eps) {
  const Vec h = sys(f);
  require(h.norm() > 0.0, "perturb_singular: state is an equilibrium");
  return f + eps * h;
}

Vec escape_singularity(const FineSystem& sys, const ProjectionMap& proj, Vec f, double tol, double eps,
                       int max_retries, int* applied) {
  int n = 0;
  while (detect_singularity(sys, proj, f, tol)) {
    if (n == max_retries) {
      throw Error(ErrorKind::UnresolvableSingularity,
                  "coarse rate stays zero after " + std::to_string(n) + " perturbations");
    }
    f = perturb_singular(sys, f, eps);
    ++n;
  }
  if (applied) *applied = n;
  return f;
}

}  // namespace plim
