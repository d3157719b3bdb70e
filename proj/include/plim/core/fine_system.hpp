#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "plim/error.hpp"

namespace plim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Autonomous fine dynamics f' = H(f).
struct FineSystem {
  std::string name;
  int dim = 0;
  std::function<Vec(const Vec&)> rhs;
  std::map<std::string, double> params;

  Vec operator()(const Vec& f) const { return rhs(f); }
  double param(const std::string& key) const;
};

/// Linear fine-to-coarse map. Either keeps a subset of fine coordinates or
/// forms weighted averages (rows of a weight matrix).
class ProjectionMap {
 public:
  enum class Kind { Selection, Weighted };

  /// Retained indices are zero-based and must be distinct.
  static ProjectionMap selection(int dim_fine, std::vector<int> retained);
  static ProjectionMap weighted(Mat weights);

  Kind kind() const { return kind_; }
  int dim_fine() const { return dim_fine_; }
  int dim_coarse() const { return static_cast<int>(weights_.rows()); }
  const std::vector<int>& retained() const { return retained_; }
  const std::vector<int>& eliminated() const { return eliminated_; }
  const Mat& weights() const { return weights_; }

  Vec project(const Vec& f) const { return weights_ * f; }
  /// DPi[H]; constant because the map is linear.
  Vec rate(const Vec& h) const { return weights_ * h; }

  /// Fine coordinates the map does not determine (selection kind). For the
  /// weighted kind the whole fine state is returned.
  Vec eliminated_part(const Vec& f) const;
  /// Number of values a sheet stores per node for this projection.
  int sheet_components() const;
  /// Rebuilds a fine state from a coarse point and sheet values.
  Vec lift(const Vec& coarse, const Vec& sheet_values) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::Selection;
  int dim_fine_ = 0;
  std::vector<int> retained_;
  std::vector<int> eliminated_;
  Mat weights_;
};

struct ConservedQuantity {
  enum class Rate { Zero, Increasing, Decreasing, Free };
  std::string name;
  std::function<double(const Vec&)> value;
  Rate expected = Rate::Zero;
};

struct FineTrajectory {
  std::vector<double> t;
  std::vector<Vec> states;

  std::size_t size() const { return t.size(); }
};

/// Carries the last finite state when a fine integration blows up.
class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(const std::string& what, Vec last, double t_last)
      : Error(ErrorKind::IntegrationDiverged, what), last_state(std::move(last)), t(t_last) {}
  Vec last_state;
  double t;
};

/// One classical fourth-order Runge-Kutta step.
template <class Rhs>
Vec rk4_step(const Rhs& rhs, const Vec& x, double dt) {
  const Vec k1 = rhs(x);
  const Vec k2 = rhs(x + 0.5 * dt * k1);
  const Vec k3 = rhs(x + 0.5 * dt * k2);
  const Vec k4 = rhs(x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Number of steps covering [0, T] with step dt (the last one may be shorter).
std::size_t step_count(double dt, double horizon);

/// Fixed-step RK4 trajectory of length step_count(dt, T) + 1 ending exactly at T.
FineTrajectory fine_integrate(const FineSystem& sys, const Vec& f0, double dt, double horizon);

}  // namespace plim
