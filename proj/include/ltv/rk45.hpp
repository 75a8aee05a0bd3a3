#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size Eigen states.
// Accepted steps are recorded together with the right-hand side at each node
// so that `Trajectory::at` can interpolate with cubic Hermite polynomials.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ltv/error.hpp"
#include "ltv/numerics.hpp"

namespace ltv {

template <typename State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<State> derivatives;
  std::size_t rejected_steps = 0;

  const State& back() const { return states.back(); }
  std::size_t size() const { return times.size(); }

  /// Cubic Hermite interpolation between accepted steps.
  State at(double t) const {
    const bool forward = times.back() >= times.front();
    const double lo = forward ? times.front() : times.back();
    const double hi = forward ? times.back() : times.front();
    if (t < lo - 1e-12 * (1.0 + std::abs(lo)) || t > hi + 1e-12 * (1.0 + std::abs(hi)))
      throw InvalidArgument("Trajectory::at: time outside the integrated interval");
    if (times.size() == 1) return states.front();

    std::size_t k;
    if (forward) {
      k = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    } else {
      k = static_cast<std::size_t>(
          std::upper_bound(times.begin(), times.end(), t, std::greater<>()) - times.begin());
    }
    k = std::clamp<std::size_t>(k, 1, times.size() - 1);

    const double t0 = times[k - 1];
    const double h = times[k] - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * states[k - 1] + (h10 * h) * derivatives[k - 1] + h01 * states[k] +
           (h11 * h) * derivatives[k];
  }
};

struct Rk45Options {
  std::size_t max_steps = 2'000'000;
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 10.0;
};

namespace detail {

template <typename State>
double weighted_rms(const State& err, const State& y0, const State& y1, double rel_tol,
                    double abs_tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = abs_tol + rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = std::abs(err(i)) / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

}  // namespace detail

/// Integrates x' = rhs(t, x) from t0 to t1 (either direction). Throws
/// StepUnderflow when the controller needs a step below 1e-14 |t1 - t0|.
template <typename State, typename Rhs>
Trajectory<State> rk45(Rhs&& rhs, double t0, const State& x0, double t1, double rel_tol,
                       double abs_tol, const Rk45Options& opt = {}) {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw InvalidArgument("rk45: tolerances must be > 0");
  if (!std::isfinite(t0) || !std::isfinite(t1)) throw InvalidArgument("rk45: non-finite time");
  require_finite(x0, "rk45 initial state");

  // Dormand & Prince (1980) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trajectory<State> out;
  State y = x0;
  State k1 = rhs(t0, y);
  out.times.push_back(t0);
  out.states.push_back(y);
  out.derivatives.push_back(k1);
  if (t1 == t0) return out;

  const double span = std::abs(t1 - t0);
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double min_step = 1e-14 * span;

  // Initial step (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    const double d0 = detail::weighted_rms(y, y, y, rel_tol, abs_tol);
    const double d1 = detail::weighted_rms(k1, y, y, rel_tol, abs_tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    const State y1 = y + dir * h0 * k1;
    const State f1 = rhs(t0 + dir * h0, y1);
    const State df = f1 - k1;
    const double d2 = all_finite(df) ? detail::weighted_rms(df, y, y, rel_tol, abs_tol) / h0 : 1e300;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100 * h0, h1, span});
  }

  double t = t0;
  double max_factor = opt.max_factor;
  std::size_t steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++steps > opt.max_steps) throw IntegrationError("rk45: step budget exhausted");
    if (h < min_step)
      throw StepUnderflow("rk45: step size underflow near t = " + std::to_string(t));

    bool last = false;
    if (h >= std::abs(t1 - t)) {
      h = std::abs(t1 - t);
      last = true;
    }
    const double hs = dir * h;

    const State k2 = rhs(t + c2 * hs, State(y + hs * (a21 * k1)));
    const State k3 = rhs(t + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
    const State k4 = rhs(t + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
    const State k5 =
        rhs(t + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const State k6 =
        rhs(t + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const State y_new = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double t_new = last ? t1 : t + hs;
    const State k7 = rhs(t_new, y_new);
    const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = all_finite(y_new) && all_finite(k7)
                          ? detail::weighted_rms(err, y, y_new, rel_tol, abs_tol)
                          : std::numeric_limits<double>::infinity();
    if (!std::isfinite(err_norm)) err_norm = 1e10;

    if (err_norm <= 1.0) {
      t = t_new;
      y = y_new;
      k1 = k7;
      out.times.push_back(t);
      out.states.push_back(y);
      out.derivatives.push_back(k1);
      const double factor =
          err_norm == 0.0 ? max_factor
                          : std::clamp(opt.safety * std::pow(err_norm, -0.2), opt.min_factor, max_factor);
      h *= factor;
      max_factor = opt.max_factor;
    } else {
      ++out.rejected_steps;
      h *= std::max(opt.min_factor, opt.safety * std::pow(err_norm, -0.2));
      max_factor = 1.0;
    }
  }
  return out;
}

}  // namespace ltv
