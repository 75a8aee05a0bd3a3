#include "ltv/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltv/error.hpp"
#include "ltv/quadrature.hpp"
#include "ltv/rk45.hpp"

namespace ltv {

const char* to_string(GammaBranch b) {
  switch (b) {
    case GammaBranch::RealPositive:
      return "RealPositive";
    case GammaBranch::Zero:
      return "Zero";
    case GammaBranch::Imaginary:
      return "Imaginary";
  }
  return "?";
}

const char* to_string(NormVerdict v) {
  switch (v) {
    case NormVerdict::NormDiverges:
      return "NormDiverges";
    case NormVerdict::NormVanishes:
      return "NormVanishes";
    case NormVerdict::NormBounded:
      return "NormBounded";
    case NormVerdict::NormPeriodic:
      return "NormPeriodic";
    case NormVerdict::NormPeriodicOrQuasiperiodic:
      return "NormPeriodicOrQuasiperiodic";
    case NormVerdict::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

cplx GammaClass::gamma() const {
  switch (branch) {
    case GammaBranch::RealPositive:
      return {root, 0.0};
    case GammaBranch::Imaginary:
      return {0.0, root};
    case GammaBranch::Zero:
      break;
  }
  return {0.0, 0.0};
}

GammaClass classify_gamma(double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw InvalidArgument("classify_gamma: alpha and beta must be finite");
  GammaClass gc;
  gc.gamma_sq = alpha + 0.25 * beta * beta;
  const double band = 1e-12 * (1.0 + std::abs(alpha) + beta * beta);
  if (std::abs(gc.gamma_sq) <= band) {
    gc.branch = GammaBranch::Zero;
  } else if (gc.gamma_sq > 0.0) {
    gc.branch = GammaBranch::RealPositive;
    gc.root = std::sqrt(gc.gamma_sq);
  } else {
    gc.branch = GammaBranch::Imaginary;
    gc.root = std::sqrt(-gc.gamma_sq);
  }
  return gc;
}

Mat2d generator(double alpha, double beta) {
  Mat2d m;
  m << -0.5 * beta, 1.0, alpha, 0.5 * beta;
  return m;
}

Mat2d exp_S(const GammaClass& gc, double alpha, double beta, double g) {
  if (!std::isfinite(g)) throw InvalidArgument("exp_S: g must be finite");
  const Mat2d m = generator(alpha, beta);
  if (g == 0.0) return Mat2d::Identity();

  double even = 1.0;  // cosh(gamma g)
  double odd = g;     // sinh(gamma g) / gamma
  switch (gc.branch) {
    case GammaBranch::RealPositive: {
      const double x = gc.root * g;
      if (std::abs(x) > 700.0) throw OverflowError("exp_S: gamma |g| exceeds 700");
      even = std::cosh(x);
      odd = std::sinh(x) / gc.root;
      break;
    }
    case GammaBranch::Imaginary: {
      const double x = gc.root * g;
      even = std::cos(x);
      odd = std::sin(x) / gc.root;
      break;
    }
    case GammaBranch::Zero: {
      // cosh(sqrt(z)) and sinh(sqrt(z))/sqrt(z) to four terms, z = gamma_sq g^2.
      const double z = gc.gamma_sq * g * g;
      even = 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0));
      odd = g * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)));
      break;
    }
  }
  return even * Mat2d::Identity() + odd * m;
}

FundamentalMatrix::FundamentalMatrix(StructuredSystem system)
    : system_(std::move(system)), gamma_(classify_gamma(system_.alpha(), system_.beta())) {}

Mat2d FundamentalMatrix::operator()(double t) const {
  if (t == system_.t0()) return Mat2d::Identity();
  const double f = system_.f(t);
  const double g = system_.g(t);
  const double scale = std::exp(f + 0.5 * system_.beta() * g);
  if (!std::isfinite(scale)) throw OverflowError("phi: scalar factor overflows");
  const Mat2d out = scale * exp_S(gamma_, system_.alpha(), system_.beta(), g);
  if (!all_finite(out)) throw OverflowError("phi: result overflows");
  return out;
}

double FundamentalMatrix::determinant(double t) const {
  if (t == system_.t0()) return 1.0;
  return std::exp(2.0 * system_.f(t) + system_.beta() * system_.g(t));
}

Mat2d FundamentalMatrix::inverse(double t) const {
  if (t == system_.t0()) return Mat2d::Identity();
  const double det = determinant(t);
  if (!std::isfinite(det) || det < std::numeric_limits<double>::min())
    throw InversionFailure("phi is numerically singular at t = " + short_text(t));
  const double f = system_.f(t);
  const double g = system_.g(t);
  const double scale = std::exp(-(f + 0.5 * system_.beta() * g));
  const Mat2d out = scale * exp_S(gamma_, system_.alpha(), system_.beta(), -g);
  if (!all_finite(out)) throw InversionFailure("phi inverse overflows at t = " + short_text(t));
  return out;
}

Vec2d solve_ivp(const FundamentalMatrix& fm, const Vec2d& x0, double t) {
  require_finite(x0, "solve_ivp initial state");
  return fm(t) * x0;
}

// ---- asymptotics ----------------------------------------------------------------

namespace {

double primitive_over(const CoefficientFunction& c, double a, double b) {
  if (c.has_antiderivative()) return c.antiderivative(b) - c.antiderivative(a);
  if (auto k = c.constant_value()) return *k * (b - a);
  return integrate([&c](double s) { return c(s); }, a, b, {1e-12, 1e-12, 4000}).value;
}

bool is_bounded(Asymptotic a) { return a == Asymptotic::Bounded || a == Asymptotic::TendsToZero; }

std::optional<double> common_period(const StructuredSystem& s) {
  for (const auto* c : {&s.a12(), &s.a11()}) {
    if (auto p = c->period(); p && declared_periodic(s, *p)) return p;
  }
  return std::nullopt;
}

}  // namespace

Asymptotic primitive_asymptotics(const CoefficientFunction& c, double t0) {
  if (c.primitive_behaviour() != Asymptotic::Unknown) return c.primitive_behaviour();
  if (auto k = c.constant_value()) {
    if (*k > 0.0) return Asymptotic::TendsToPlusInfinity;
    if (*k < 0.0) return Asymptotic::TendsToMinusInfinity;
    return Asymptotic::TendsToZero;
  }
  if (auto p = c.period()) {
    const double mean = primitive_over(c, t0, t0 + *p) / *p;
    if (std::abs(mean) <= 1e-9) return Asymptotic::Bounded;
    return mean > 0.0 ? Asymptotic::TendsToPlusInfinity : Asymptotic::TendsToMinusInfinity;
  }
  return Asymptotic::Unknown;
}

NormVerdict classify_asymptotics(const FundamentalMatrix& fm, const AsymptoticsOptions& opt) {
  const StructuredSystem& s = fm.system();
  const Asymptotic fb = primitive_asymptotics(s.a11(), s.t0());
  const Asymptotic gb = primitive_asymptotics(s.a12(), s.t0());
  const double beta = s.beta();

  switch (fm.gamma().branch) {
    case GammaBranch::RealPositive:
      if (beta > 0.0 && is_bounded(fb) && gb == Asymptotic::TendsToPlusInfinity)
        return NormVerdict::NormDiverges;
      if (fb == Asymptotic::TendsToPlusInfinity && is_bounded(gb)) return NormVerdict::NormDiverges;
      if (fb == Asymptotic::TendsToMinusInfinity && is_bounded(gb)) return NormVerdict::NormVanishes;
      return NormVerdict::Inconclusive;

    case GammaBranch::Imaginary: {
      // h = f + beta g / 2 is the log of the scalar prefactor of Phi.
      const auto h = [&](double t) { return s.f(t) + 0.5 * beta * s.g(t); };
      const auto period = common_period(s);
      const double window = period ? *period : opt.probe_window;
      const auto grid = chebyshev_grid(s.t0(), s.t0() + window);
      double h_max = 0.0, scale = 1.0;
      for (double t : grid) {
        h_max = std::max(h_max, std::abs(h(t)));
        scale = std::max(scale, 1.0 + std::abs(s.f(t)) + std::abs(0.5 * beta * s.g(t)));
      }
      if (h_max <= opt.tolerance * scale) return NormVerdict::NormPeriodic;
      if (!period) return NormVerdict::Inconclusive;
      for (double t : grid) {
        const double ht = h(t);
        if (std::abs(h(t + *period) - ht) > opt.tolerance * (1.0 + std::abs(ht)))
          return NormVerdict::Inconclusive;
      }
      return NormVerdict::NormPeriodicOrQuasiperiodic;
    }

    case GammaBranch::Zero:
      if (is_bounded(fb) && is_bounded(gb)) return NormVerdict::NormBounded;
      // Subsumed by the bounded row above.
      if (fb == Asymptotic::TendsToZero && gb == Asymptotic::TendsToZero)
        return NormVerdict::NormVanishes;
      if (fb == Asymptotic::TendsToPlusInfinity) return NormVerdict::NormDiverges;
      if (fb == Asymptotic::TendsToMinusInfinity) return NormVerdict::NormVanishes;
      return NormVerdict::Inconclusive;
  }
  return NormVerdict::Inconclusive;
}

// ---- nonhomogeneous systems ---------------------------------------------------------

RightHandSide nonhomogeneous_rhs(const FundamentalMatrix& fm, Forcing forcing) {
  return [fm, forcing = std::move(forcing)](double t, const Vec2d& y) -> Vec2d {
    const Vec2d x = fm(t) * y;
    return fm.inverse(t) * forcing(x, t);
  };
}

Vec2d solve_nonhomogeneous(const FundamentalMatrix& fm, const Forcing& forcing, const Vec2d& x0,
                           double t, double rel_tol, double abs_tol) {
  const RightHandSide rhs = nonhomogeneous_rhs(fm, forcing);
  const auto traj = rk45(rhs, fm.system().t0(), x0, t, rel_tol, abs_tol);
  return fm(t) * traj.back();
}

}  // namespace ltv
