#include "ltv/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "ltv/error.hpp"
#include "ltv/quadrature.hpp"

namespace ltv {

const char* to_string(Asymptotic a) {
  switch (a) {
    case Asymptotic::Bounded:
      return "bounded";
    case Asymptotic::TendsToPlusInfinity:
      return "tends_to(+inf)";
    case Asymptotic::TendsToMinusInfinity:
      return "tends_to(-inf)";
    case Asymptotic::TendsToZero:
      return "tends_to(0)";
    case Asymptotic::Unknown:
      return "unknown";
  }
  return "unknown";
}

// ---- CoefficientFunction ----------------------------------------------------

CoefficientFunction::CoefficientFunction(Fn value, std::string label)
    : value_(std::make_shared<const Fn>(std::move(value))), label_(std::move(label)) {}

CoefficientFunction CoefficientFunction::from_expression(const Expression& e) {
  CoefficientFunction c([e](double t) { return eval(e, t); }, to_string(e));
  if (!e.depends_on_time()) c.constant_ = eval(e, 0.0);
  return c;
}

CoefficientFunction CoefficientFunction::constant(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("constant coefficient must be finite");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  CoefficientFunction c([value](double) { return value; }, buf);
  c.constant_ = value;
  return c;
}

CoefficientFunction CoefficientFunction::with_antiderivative(Fn antiderivative, double window_begin,
                                                             double window_end) const {
  CoefficientFunction out = *this;
  out.antiderivative_ = std::make_shared<const Fn>(std::move(antiderivative));
  const Fn& big_f = *out.antiderivative_;
  for (double t : chebyshev_grid(window_begin, window_end, 9)) {
    double v, slope;
    const double h = 1e-5 * (1.0 + std::abs(t));
    try {
      v = (*value_)(t);
      slope = (big_f(t + h) - big_f(t - h)) / (2.0 * h);
    } catch (const DomainError&) {
      continue;
    }
    if (std::abs(slope - v) > 1e-6 * (1.0 + std::abs(v)))
      throw InvalidArgument("antiderivative of '" + label_ + "' does not differentiate back at t = " +
                            short_text(t));
  }
  return out;
}

CoefficientFunction CoefficientFunction::with_derivative(Fn derivative) const {
  CoefficientFunction out = *this;
  out.derivative_ = std::make_shared<const Fn>(std::move(derivative));
  return out;
}

CoefficientFunction CoefficientFunction::with_period(double period) const {
  if (!(period > 0.0) || !std::isfinite(period))
    throw InvalidArgument("period must be positive and finite");
  if (!constant_) {
    for (double t : chebyshev_grid(0.0, period, 17)) {
      double a, b;
      try {
        a = (*value_)(t);
        b = (*value_)(t + period);
      } catch (const DomainError&) {
        continue;
      }
      if (std::abs(a - b) > 1e-10 * (1.0 + std::abs(a)))
        throw InvalidArgument("'" + label_ + "' is not periodic with period " +
                              short_text(period));
    }
  }
  CoefficientFunction out = *this;
  out.period_ = period;
  return out;
}

CoefficientFunction CoefficientFunction::with_primitive_behaviour(Asymptotic behaviour) const {
  CoefficientFunction out = *this;
  out.behaviour_ = behaviour;
  return out;
}

double CoefficientFunction::derivative(double t) const {
  if (derivative_) return (*derivative_)(t);
  if (constant_) return 0.0;
  const double h = 1e-5 * (1.0 + std::abs(t));
  const Fn& f = *value_;
  return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

// ---- systems ------------------------------------------------------------------

Mat2d GeneralSystem::matrix(double t) const {
  Mat2d m;
  m << a11(t), a12(t), a21(t), a22(t);
  return m;
}

struct StructuredSystem::Cache {
  std::mutex mutex;
  std::unordered_map<double, double> f, g;
};

StructuredSystem::StructuredSystem(CoefficientFunction a11, CoefficientFunction a12, double alpha,
                                   double beta, double t0)
    : a11_(std::move(a11)),
      a12_(std::move(a12)),
      alpha_(alpha),
      beta_(beta),
      t0_(t0),
      cache_(std::make_shared<Cache>()) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(t0))
    throw InvalidArgument("StructuredSystem: alpha, beta and t0 must be finite");
}

Mat2d StructuredSystem::matrix(double t) const {
  const double p = a11_(t);
  const double q = a12_(t);
  Mat2d m;
  m << p, q, alpha_ * q, p + beta_ * q;
  return m;
}

Mat2d StructuredSystem::primitive(double t) const {
  const double fv = f(t);
  const double gv = g(t);
  Mat2d d;
  d << fv, gv, alpha_ * gv, fv + beta_ * gv;
  return d;
}

namespace {

double primitive_of(const CoefficientFunction& c, double t0, double t) {
  if (t == t0) return 0.0;
  if (c.has_antiderivative()) return c.antiderivative(t) - c.antiderivative(t0);
  if (auto k = c.constant_value()) return *k * (t - t0);
  return integrate([&c](double s) { return c(s); }, t0, t, {1e-10, 1e-10, 4000}).value;
}

double memoized(std::mutex& mutex, std::unordered_map<double, double>& table, double t,
                const auto& compute) {
  {
    std::lock_guard lock(mutex);
    if (auto it = table.find(t); it != table.end()) return it->second;
  }
  const double v = compute();
  std::lock_guard lock(mutex);
  if (table.size() >= (1u << 16)) table.clear();
  table.emplace(t, v);
  return v;
}

}  // namespace

double StructuredSystem::f(double t) const {
  return memoized(cache_->mutex, cache_->f, t, [&] { return primitive_of(a11_, t0_, t); });
}

double StructuredSystem::g(double t) const {
  return memoized(cache_->mutex, cache_->g, t, [&] { return primitive_of(a12_, t0_, t); });
}

GeneralSystem StructuredSystem::as_general() const {
  const CoefficientFunction p = a11_;
  const CoefficientFunction q = a12_;
  const double alpha = alpha_;
  const double beta = beta_;
  CoefficientFunction a21([q, alpha](double t) { return alpha * q(t); }, "alpha*a12");
  CoefficientFunction a22([p, q, beta](double t) { return p(t) + beta * q(t); }, "a11+beta*a12");
  return GeneralSystem{a11_, a12_, a21, a22, t0_};
}

std::vector<double> chebyshev_grid(double a, double b, std::size_t n) {
  if (n < 2) return {0.5 * (a + b)};
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = -std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
    grid[k] = 0.5 * (a + b) + 0.5 * (b - a) * x;
  }
  grid.front() = a;
  grid.back() = b;
  return grid;
}

FitReport fit_constants(const GeneralSystem& sys, std::span<const double> grid, double tol) {
  if (grid.size() < 8) throw InvalidArgument("fit_structure: grid needs at least 8 points");
  if (!(tol > 0.0)) throw InvalidArgument("fit_structure: tol must be > 0");

  std::vector<double> q(grid.size()), lower(grid.size()), diag(grid.size());
  double qq = 0.0, q_lower = 0.0, q_diag = 0.0, q_max = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Mat2d m = sys.matrix(grid[i]);
    if (!all_finite(m)) throw InvalidArgument("fit_structure: non-finite coefficient on the grid");
    q[i] = m(0, 1);
    lower[i] = m(1, 0);
    diag[i] = m(1, 1) - m(0, 0);
    qq += q[i] * q[i];
    q_lower += q[i] * lower[i];
    q_diag += q[i] * diag[i];
    q_max = std::max(q_max, std::abs(q[i]));
  }
  if (q_max <= 1e-12)
    throw DegenerateA12("a12 vanishes on the whole grid; alpha and beta are not identifiable");

  FitReport r;
  r.alpha = q_lower / qq;
  r.beta = q_diag / qq;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    r.residual = std::max({r.residual, std::abs(lower[i] - r.alpha * q[i]),
                           std::abs(diag[i] - r.beta * q[i])});
  }
  r.threshold = tol * (1.0 + q_max);
  return r;
}

StructuredSystem fit_structure(const GeneralSystem& sys, std::span<const double> grid, double tol) {
  const FitReport r = fit_constants(sys, grid, tol);
  if (r.residual > r.threshold) throw NotCommutingClass(r.residual, r.threshold);
  return StructuredSystem(sys.a11, sys.a12, r.alpha, r.beta, sys.t0);
}

Mat2d average_matrix(const StructuredSystem& s, double period) {
  if (!(period > 0.0)) throw InvalidArgument("average_matrix: period must be > 0");
  const double b11 = s.f(s.t0() + period) / period;
  const double b12 = s.g(s.t0() + period) / period;
  Mat2d b;
  b << b11, b12, s.alpha() * b12, b11 + s.beta() * b12;
  return b;
}

namespace {

bool has_period(const CoefficientFunction& c, double period) {
  if (c.constant_value()) return true;
  const auto p = c.period();
  if (!p) return false;
  const double ratio = period / *p;
  return ratio >= 1.0 - 1e-12 && std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio;
}

}  // namespace

bool declared_periodic(const StructuredSystem& s, double period) {
  return has_period(s.a11(), period) && has_period(s.a12(), period);
}

double commutation_residual(const StructuredSystem& s, std::span<const double> grid) {
  double worst = 0.0;
  for (double t : grid) {
    const Mat2d a = s.matrix(t);
    const Mat2d d = s.primitive(t);
    worst = std::max(worst, (a * d - d * a).norm() / (1.0 + a.norm() * d.norm()));
  }
  return worst;
}

double derivative_commutation_residual(const StructuredSystem& s, std::span<const double> grid) {
  double worst = 0.0;
  for (double t : grid) {
    const double h = 1e-5 * (1.0 + std::abs(t));
    const Mat2d a = s.matrix(t);
    const Mat2d da = (s.matrix(t + h) - s.matrix(t - h)) / (2.0 * h);
    worst = std::max(worst, (a * da - da * a).norm() / (1.0 + a.norm() * da.norm()));
  }
  return worst;
}

}  // namespace ltv
