#include "plim/core/fine_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plim {

double FineSystem::param(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw Error(ErrorKind::Config, name + ": no parameter '" + key + "'");
  return it->second;
}

ProjectionMap ProjectionMap::selection(int dim_fine, std::vector<int> retained) {
  require(dim_fine > 0, "projection: fine dimension must be positive");
  require(!retained.empty() && static_cast<int>(retained.size()) < dim_fine,
          "projection: need 0 < dim_coarse < dim_fine");
  std::vector<int> sorted = retained;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "projection: retained indices must be distinct");
  require(sorted.front() >= 0 && sorted.back() < dim_fine, "projection: index out of range");

  ProjectionMap p;
  p.kind_ = Kind::Selection;
  p.dim_fine_ = dim_fine;
  p.retained_ = std::move(retained);
  for (int i = 0; i < dim_fine; ++i) {
    if (!std::binary_search(sorted.begin(), sorted.end(), i)) p.eliminated_.push_back(i);
  }
  p.weights_ = Mat::Zero(static_cast<Eigen::Index>(p.retained_.size()), dim_fine);
  for (std::size_t r = 0; r < p.retained_.size(); ++r) {
    p.weights_(static_cast<Eigen::Index>(r), p.retained_[r]) = 1.0;
  }
  return p;
}

ProjectionMap ProjectionMap::weighted(Mat weights) {
  require(weights.rows() > 0 && weights.rows() < weights.cols(),
          "projection: need 0 < dim_coarse < dim_fine");
  ProjectionMap p;
  p.kind_ = Kind::Weighted;
  p.dim_fine_ = static_cast<int>(weights.cols());
  p.weights_ = std::move(weights);
  return p;
}

Vec ProjectionMap::eliminated_part(const Vec& f) const {
  if (kind_ == Kind::Weighted) return f;
  Vec out(static_cast<Eigen::Index>(eliminated_.size()));
  for (std::size_t i = 0; i < eliminated_.size(); ++i) out[static_cast<Eigen::Index>(i)] = f[eliminated_[i]];
  return out;
}

int ProjectionMap::sheet_components() const {
  return kind_ == Kind::Weighted ? dim_fine_ : static_cast<int>(eliminated_.size());
}

Vec ProjectionMap::lift(const Vec& coarse, const Vec& sheet_values) const {
  if (kind_ == Kind::Weighted) return sheet_values;
  Vec f(dim_fine_);
  for (std::size_t i = 0; i < retained_.size(); ++i) f[retained_[i]] = coarse[static_cast<Eigen::Index>(i)];
  for (std::size_t i = 0; i < eliminated_.size(); ++i) {
    f[eliminated_[i]] = sheet_values[static_cast<Eigen::Index>(i)];
  }
  return f;
}

std::string ProjectionMap::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::Selection) {
    os << "select " << dim_fine_ << ':';
    for (std::size_t i = 0; i < retained_.size(); ++i) os << (i ? "," : "") << retained_[i];
  } else {
    os << "weighted " << weights_.rows() << 'x' << weights_.cols();
  }
  return os.str();
}

std::size_t step_count(double dt, double horizon) {
  require(dt > 0.0, "integration step must be positive");
  require(horizon >= 0.0, "horizon must be non-negative");
  // Absorb round-off so T = k*dt gives exactly k steps.
  const double ratio = horizon / dt;
  const double k = std::round(ratio);
  if (std::abs(ratio - k) <= 1e-9 * std::max(1.0, k)) return static_cast<std::size_t>(k);
  return static_cast<std::size_t>(std::ceil(ratio));
}

FineTrajectory fine_integrate(const FineSystem& sys, const Vec& f0, double dt, double horizon) {
  require(f0.size() == sys.dim, "fine_integrate: state dimension mismatch");
  const std::size_t n = step_count(dt, horizon);
  FineTrajectory traj;
  traj.t.reserve(n + 1);
  traj.states.reserve(n + 1);
  traj.t.push_back(0.0);
  traj.states.push_back(f0);
  Vec x = f0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    const double t_next = k == n ? horizon : static_cast<double>(k) * dt;
    Vec next = rk4_step(sys.rhs, x, t_next - t_prev);
    if (!next.allFinite()) {
      throw IntegrationDiverged(sys.name + " at t=" + std::to_string(t_prev), x, t_prev);
    }
    x = std::move(next);
    traj.t.push_back(t_next);
    traj.states.push_back(x);
  }
  return traj;
}

}  // namespace plim
