#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>

namespace floqmem {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 selects an automatic first step
  double h_max = std::numeric_limits<double>::infinity();
  double h_min_rel = 1e-14;  // underflow guard relative to |t|
  std::size_t max_steps = 100'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_calls = 0;
  double last_step = 0.0;

  double rejection_rate() const {
    const std::size_t total = accepted + rejected;
    return total == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(total);
  }
};

// Dormand-Prince 5(4) with FSAL, stepping exactly onto every grid point.
//
// State is any resizable Eigen dense type. `rhs(t, y, dydt)` writes the
// derivative; `observe(index, t, y)` is called at grid[0] and at each later
// grid point.
template <typename State, typename Rhs, typename Observer>
OdeStats integrate_dp45(Rhs&& rhs, State& y, std::span<const double> grid, const OdeOptions& opt,
                        Observer&& observe) {
  OdeStats stats;
  if (grid.empty()) return stats;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  double t = grid[0];
  observe(std::size_t{0}, t, static_cast<const State&>(y));
  if (grid.size() == 1) return stats;

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, ynew = y;
  rhs(t, y, k1);
  ++stats.rhs_calls;

  auto error_norm = [&](const State& err, const State& a, const State& b) {
    double worst = 0.0;
    const auto* pe = err.data();
    const auto* pa = a.data();
    const auto* pb = b.data();
    const Eigen::Index n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double scale = opt.atol + opt.rtol * std::max(std::abs(pa[i]), std::abs(pb[i]));
      worst = std::max(worst, std::abs(pe[i]) / scale);
    }
    return worst;
  };

  double h = opt.h_init;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    const auto* py = y.data();
    const auto* pk = k1.data();
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(py[i]);
      d0 = std::max(d0, std::abs(py[i]) / sc);
      d1 = std::max(d1, std::abs(pk[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, grid.back() - grid.front());
  }
  h = std::min(h, opt.h_max);

  for (std::size_t gi = 1; gi < grid.size(); ++gi) {
    const double target = grid[gi];
    while (t < target) {
      if (stats.accepted + stats.rejected >= opt.max_steps) {
        throw IntegrationError("maximum number of integration steps exceeded", t);
      }
      const double remaining = target - t;
      bool last = false;
      double step = h;
      if (step >= remaining * (1.0 - 1e-12)) {
        step = remaining;
        last = true;
      }
      const double h_min = opt.h_min_rel * std::max(1.0, std::abs(t));
      if (step < h_min && !last) {
        std::ostringstream os;
        os << "step size underflow (h = " << step << ") at t = " << t;
        throw IntegrationError(os.str(), t);
      }

      tmp = y + (step * a21) * k1;
      rhs(t + c2 * step, tmp, k2);
      tmp = y + step * (a31 * k1 + a32 * k2);
      rhs(t + c3 * step, tmp, k3);
      tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * step, tmp, k4);
      tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * step, tmp, k5);
      tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + step, tmp, k6);
      ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + step, ynew, k7);
      stats.rhs_calls += 6;
      tmp = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double err = error_norm(tmp, y, ynew);
      if (!std::isfinite(err)) {
        ++stats.rejected;
        h = 0.1 * step;
        continue;
      }
      if (err <= 1.0) {
        t = last ? target : t + step;
        y.swap(ynew);
        k1.swap(k7);
        ++stats.accepted;
        stats.last_step = step;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // A step shortened to land on the grid does not shrink the next one.
        h = std::min(opt.h_max, last && step < h ? std::max(h, step * fac) : step * fac);
      } else {
        ++stats.rejected;
        h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      }
    }
    observe(gi, t, static_cast<const State&>(y));
  }
  return stats;
}

}  // namespace floqmem
