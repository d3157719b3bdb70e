#include "plim/anneal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "plim/error.hpp"
#include "plim/rng.hpp"

namespace plim::anneal {

void AnnealConfig::validate() const {
  require(cooling > 0.0 && cooling < 1.0, "anneal: cooling ratio must lie in (0,1)");
  require(t_min_ratio > 0.0 && t_min_ratio < 1.0, "anneal: t_min_ratio must lie in (0,1)");
  require(iters_per_temp > 0, "anneal: iters_per_temp must be positive");
  require(restarts >= 0, "anneal: restarts must be non-negative");
  require(auto_t0 || t0 >= 0.0, "anneal: t0 must be non-negative");
}

namespace {

struct NonFinite {};

// Simplex state plus the best point ever evaluated.
class Annealer {
 public:
  Annealer(const Objective& f, const AnnealConfig& cfg, std::size_t n)
      : f_(f), cfg_(cfg), n_(n), rng_(cfg.seed) {
    const double dn = static_cast<double>(n);
    // Dimension-adaptive Nelder-Mead coefficients (Gao & Han).
    expand_ = n > 1 ? 1.0 + 2.0 / dn : 2.0;
    contract_ = n > 1 ? 0.75 - 0.5 / dn : 0.5;
    shrink_ = n > 1 ? 1.0 - 1.0 / dn : 0.5;
  }

  double eval(const std::vector<double>& x) {
    if (cfg_.max_evaluations > 0 && evals_ >= cfg_.max_evaluations) throw Budget{};
    ++evals_;
    const double v = f_(std::span<const double>(x));
    if (!std::isfinite(v)) throw NonFinite{};
    if (v < best_f_) {
      best_f_ = v;
      best_x_ = x;
    }
    return v;
  }

  void init_simplex(const std::vector<double>& centre, double centre_f) {
    p_.assign(n_ + 1, centre);
    y_.assign(n_ + 1, centre_f);
    for (std::size_t i = 0; i < n_; ++i) {
      const double s = cfg_.step.empty() ? cfg_.step_scale : cfg_.step[i];
      p_[i + 1][i] += s;
      y_[i + 1] = eval(p_[i + 1]);
    }
    update_psum();
  }

  // One temperature level: at most `iters` function evaluations.
  void level(double temperature, int iters) {
    const auto fluct = [&] { return -temperature * std::log(rng_.uniform()); };
    while (true) {
      std::size_t ilo = 0, ihi = 1, inhi = 0;
      double ylo = y_[0] + fluct();
      double yhi = y_[1] + fluct();
      if (ylo > yhi) {
        std::swap(ilo, ihi);
        std::swap(ylo, yhi);
      }
      double ynhi = ylo;
      inhi = ilo;
      for (std::size_t i = 2; i <= n_; ++i) {
        const double yt = y_[i] + fluct();
        if (yt <= ylo) {
          ilo = i;
          ylo = yt;
        }
        if (yt > yhi) {
          inhi = ihi;
          ynhi = yhi;
          ihi = i;
          yhi = yt;
        } else if (yt > ynhi) {
          inhi = i;
          ynhi = yt;
        }
      }
      const double spread =
          2.0 * std::abs(yhi - ylo) / (std::abs(yhi) + std::abs(ylo) + 1e-300);
      if (spread < cfg_.ftol || iters <= 0) return;

      iters -= 2;
      double ytry = trial(ihi, yhi, -1.0, temperature);
      if (ytry <= ylo) {
        ytry = trial(ihi, yhi, expand_, temperature);
      } else if (ytry >= ynhi) {
        const double ysave = yhi;
        ytry = trial(ihi, yhi, contract_, temperature);
        if (ytry >= ysave) {
          for (std::size_t i = 0; i <= n_; ++i) {
            if (i == ilo) continue;
            for (std::size_t j = 0; j < n_; ++j) {
              p_[i][j] = p_[ilo][j] + shrink_ * (p_[i][j] - p_[ilo][j]);
            }
            y_[i] = eval(p_[i]);
          }
          iters -= static_cast<int>(n_);
          update_psum();
        }
      } else {
        ++iters;
      }
      (void)inhi;
    }
  }

  long evaluations() const { return evals_; }
  double best_f() const { return best_f_; }
  const std::vector<double>& best_x() const { return best_x_; }
  void seed_best(const std::vector<double>& x, double fx) {
    best_x_ = x;
    best_f_ = fx;
  }

  struct Budget {};

 private:
  // Moves the high vertex to centroid + lambda * (p_hi - centroid).
  double trial(std::size_t ihi, double& yhi, double lambda, double temperature) {
    const double dn = static_cast<double>(n_);
    ptry_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const double centroid = (psum_[j] - p_[ihi][j]) / dn;
      ptry_[j] = centroid + lambda * (p_[ihi][j] - centroid);
    }
    const double ytry = eval(ptry_);
    const double yflu = ytry + temperature * std::log(rng_.uniform());
    if (yflu < yhi) {
      y_[ihi] = ytry;
      yhi = yflu;
      for (std::size_t j = 0; j < n_; ++j) {
        psum_[j] += ptry_[j] - p_[ihi][j];
        p_[ihi][j] = ptry_[j];
      }
    }
    return yflu;
  }

  void update_psum() {
    psum_.assign(n_, 0.0);
    for (const auto& v : p_) {
      for (std::size_t j = 0; j < n_; ++j) psum_[j] += v[j];
    }
  }

  const Objective& f_;
  const AnnealConfig& cfg_;
  std::size_t n_;
  CounterRng rng_;
  double expand_, contract_, shrink_;
  std::vector<std::vector<double>> p_;
  std::vector<double> y_, psum_, ptry_;
  std::vector<double> best_x_;
  double best_f_ = std::numeric_limits<double>::infinity();
  long evals_ = 0;
};

}  // namespace

AnnealResult minimize(const Objective& objective, std::vector<double> x0, const AnnealConfig& config) {
  config.validate();
  require(config.step.empty() || config.step.size() == x0.size(), "anneal: step size mismatch");
  AnnealResult out;
  const double f0 = objective(std::span<const double>(x0));
  require(std::isfinite(f0), "anneal: objective must be finite at x0");
  out.x = x0;
  out.f = f0;
  out.evaluations = 1;
  if (x0.empty()) return out;

  Annealer ann(objective, config, x0.size());
  ann.seed_best(x0, f0);
  const double t0 = config.auto_t0 ? std::abs(f0) : config.t0;
  const int levels = static_cast<int>(std::ceil(std::log(config.t_min_ratio) / std::log(config.cooling)));

  try {
    for (int pass = 0; pass <= config.restarts; ++pass) {
      ann.init_simplex(ann.best_x(), ann.best_f());
      double temperature = t0;
      for (int k = 0; k < levels; ++k) {
        ann.level(temperature, config.iters_per_temp);
        out.trace.push_back({pass, temperature, ann.best_f(), ann.evaluations() + 1});
        temperature *= config.cooling;
      }
      // Final quench at zero temperature.
      ann.level(0.0, config.iters_per_temp);
      out.trace.push_back({pass, 0.0, ann.best_f(), ann.evaluations() + 1});
    }
  } catch (const NonFinite&) {
    out.aborted = true;
  } catch (const Annealer::Budget&) {
  }
  out.x = ann.best_x();
  out.f = ann.best_f();
  out.evaluations = ann.evaluations() + 1;
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "pass,temperature,best,evaluations\n";
  out.precision(17);
  for (const auto& p : trace) {
    out << p.pass << ',' << p.temperature << ',' << p.best << ',' << p.evaluations << '\n';
  }
}

}  // namespace plim::anneal
