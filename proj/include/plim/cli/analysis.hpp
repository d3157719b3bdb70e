#pragma once

#include <cstddef>
#include <vector>

namespace plim::cli {

/// Running time average (1/T) * integral_0^T f dt of samples spaced dt apart
/// from t = 0 (trapezoidal rule). The first value is f(0).
std::vector<double> running_average(const std::vector<double>& f, double dt);

/// Transversal crossings between non-adjacent segments of the polyline
/// (x[i], y[i]). Touching or collinear segments are not counted.
std::size_t count_self_intersections(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace plim::cli
