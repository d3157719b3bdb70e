#include "plim/cli/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>

#include "plim/error.hpp"

namespace plim::cli {

std::vector<double> running_average(const std::vector<double>& f, double dt) {
  require(!f.empty(), "running_average: empty series");
  require(dt > 0.0, "running_average: dt must be positive");
  std::vector<double> out(f.size());
  out[0] = f[0];
  double integral = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) {
    integral += 0.5 * dt * (f[k - 1] + f[k]);
    out[k] = integral / (dt * static_cast<double>(k));
  }
  return out;
}

namespace {

int orientation(double ax, double ay, double bx, double by, double cx, double cy) {
  const double d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return (d > 0.0) - (d < 0.0);
}

bool crosses(const std::vector<double>& x, const std::vector<double>& y, std::size_t i, std::size_t j) {
  const int o1 = orientation(x[i], y[i], x[i + 1], y[i + 1], x[j], y[j]);
  const int o2 = orientation(x[i], y[i], x[i + 1], y[i + 1], x[j + 1], y[j + 1]);
  const int o3 = orientation(x[j], y[j], x[j + 1], y[j + 1], x[i], y[i]);
  const int o4 = orientation(x[j], y[j], x[j + 1], y[j + 1], x[i + 1], y[i + 1]);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

std::size_t count_self_intersections(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "count_self_intersections: coordinate lengths differ");
  if (x.size() < 4) return 0;
  const std::size_t segments = x.size() - 1;

  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double extent = std::max(*xmax - *xmin, *ymax - *ymin);
  if (!(extent > 0.0)) return 0;
  double mean_len = 0.0;
  for (std::size_t i = 0; i < segments; ++i) mean_len += std::hypot(x[i + 1] - x[i], y[i + 1] - y[i]);
  mean_len /= static_cast<double>(segments);
  const double cell = std::max(2.0 * mean_len, extent / 4096.0);

  auto key = [](std::int64_t i, std::int64_t j) { return (i << 32) ^ (j & 0xffffffff); };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  for (std::size_t s = 0; s < segments; ++s) {
    const auto i0 = static_cast<std::int64_t>(std::floor((std::min(x[s], x[s + 1]) - *xmin) / cell));
    const auto i1 = static_cast<std::int64_t>(std::floor((std::max(x[s], x[s + 1]) - *xmin) / cell));
    const auto j0 = static_cast<std::int64_t>(std::floor((std::min(y[s], y[s + 1]) - *ymin) / cell));
    const auto j1 = static_cast<std::int64_t>(std::floor((std::max(y[s], y[s + 1]) - *ymin) / cell));
    for (auto i = i0; i <= i1; ++i)
      for (auto j = j0; j <= j1; ++j) grid[key(i, j)].push_back(s);
  }

  std::vector<std::pair<std::size_t, std::size_t>> hits;
  for (const auto& [k, members] : grid) {
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const std::size_t i = std::min(members[a], members[b]);
        const std::size_t j = std::max(members[a], members[b]);
        if (j > i + 1 && crosses(x, y, i, j)) hits.emplace_back(i, j);
      }
  }
  std::sort(hits.begin(), hits.end());
  return static_cast<std::size_t>(std::unique(hits.begin(), hits.end()) - hits.begin());
}

}  // namespace plim::cli
