#include "ltv/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "ltv/error.hpp"
#include "ltv/quadrature.hpp"
#include "ltv/rk45.hpp"

namespace ltv {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::AsymptoticallyStable:
      return "AsymptoticallyStable";
    case Stability::Stable:
      return "Stable";
    case Stability::Unstable:
      return "Unstable";
  }
  return "?";
}

cplx principal_exponent(cplx lambda, double period) {
  if (!(period > 0.0)) throw InvalidArgument("principal_exponent: period must be > 0");
  const double w = 2.0 * std::numbers::pi / period;
  const double top = std::numbers::pi / period;
  double im = lambda.imag();
  im += w * std::floor((top - im) / w);
  // floor can land exactly on the excluded lower edge through rounding.
  if (im <= -top) im += w;
  if (im > top) im -= w;
  return {lambda.real(), im};
}

namespace {

double modular_distance(cplx a, cplx b, double period) {
  const cplx d = principal_exponent(a - b, period);
  return std::abs(d);
}

}  // namespace

double exponent_distance(const std::array<cplx, 2>& a, const std::array<cplx, 2>& b,
                         double period) {
  const double straight =
      std::max(modular_distance(a[0], b[0], period), modular_distance(a[1], b[1], period));
  const double crossed =
      std::max(modular_distance(a[0], b[1], period), modular_distance(a[1], b[0], period));
  return std::min(straight, crossed);
}

FloquetData floquet_from_averages(const StructuredSystem& s, double period) {
  FloquetData fd;
  fd.period = period;
  const Mat2d b = average_matrix(s, period);
  if (!declared_periodic(s, period))
    fd.warnings.push_back("a11/a12 are not declared periodic with period " + short_text(period) +
                          "; the averaged matrix is not a Floquet generator in general");

  const GammaClass gc = classify_gamma(s.alpha(), s.beta());
  const double mean11 = b(0, 0);
  const double mean12 = b(0, 1);
  const cplx centre = mean11 + 0.5 * s.beta() * mean12;
  // The exact root here, not the zero band used by exp_S.
  const cplx spread = std::sqrt(cplx(gc.gamma_sq)) * mean12;
  fd.raw_exponents = {centre + spread, centre - spread};
  // Same order as eig2: real part descending, then imaginary part.
  const cplx& first = fd.raw_exponents[0];
  const cplx& second = fd.raw_exponents[1];
  if (first.real() < second.real() || (first.real() == second.real() && first.imag() < second.imag()))
    std::swap(fd.raw_exponents[0], fd.raw_exponents[1]);

  const EigenPair2<double> ep = eig2(b);
  const std::array<cplx, 2> from_eig = {ep.values(0), ep.values(1)};
  const double straight = std::max(std::abs(from_eig[0] - fd.raw_exponents[0]),
                                   std::abs(from_eig[1] - fd.raw_exponents[1]));
  const double crossed = std::max(std::abs(from_eig[0] - fd.raw_exponents[1]),
                                  std::abs(from_eig[1] - fd.raw_exponents[0]));
  const double scale = 1.0 + std::abs(fd.raw_exponents[0]) + std::abs(fd.raw_exponents[1]);
  // Eigenvalue condition: eps |B| / separation, capped at sqrt(eps) |B| for a
  // (near-)coincident pair.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double separation = std::abs(fd.raw_exponents[0] - fd.raw_exponents[1]);
  const double conditioning =
      separation > 0.0 ? std::min(eps * scale * scale / separation, std::sqrt(eps) * scale)
                       : std::sqrt(eps) * scale;
  const double allowed = 1e-10 * scale + 16.0 * conditioning;
  if (std::min(straight, crossed) > allowed) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "averaged exponents disagree with eig2(B) by %.3g (allowed %.3g)",
                  std::min(straight, crossed), allowed);
    throw ConsistencyError(msg);
  }

  fd.B = b.cast<cplx>();
  fd.defective = ep.defective;
  for (int k = 0; k < 2; ++k) {
    fd.exponents[k] = principal_exponent(fd.raw_exponents[k], period);
    if (fd.exponents[k] != fd.raw_exponents[k]) fd.reduced = true;
    fd.multipliers[k] = std::exp(fd.raw_exponents[k] * period);
  }
  return fd;
}

Mat2d propagator_numeric(const std::function<Mat2d(double)>& coefficients, double t0, double t1,
                         double rel_tol, double abs_tol) {
  const auto rhs = [&coefficients](double t, const Vec2d& x) -> Vec2d { return coefficients(t) * x; };
  Mat2d out;
  for (int k = 0; k < 2; ++k) {
    const Vec2d e = Mat2d::Identity().col(k);
    out.col(k) = rk45(rhs, t0, e, t1, rel_tol, abs_tol).back();
  }
  return out;
}

namespace {

Monodromy monodromy_from(const std::function<Mat2d(double)>& coefficients, double t0, double period,
                         double tol) {
  if (!(period > 0.0)) throw InvalidArgument("monodromy_numeric: period must be > 0");
  if (!(tol > 0.0)) throw InvalidArgument("monodromy_numeric: tol must be > 0");
  Monodromy m;
  m.period = period;
  m.rel_tol = tol;
  m.abs_tol = 1e-2 * tol;
  m.C = propagator_numeric(coefficients, t0, t0 + period, m.rel_tol, m.abs_tol);
  if (!(m.C.determinant() > 0.0))
    throw ConsistencyError("monodromy matrix has non-positive determinant");
  return m;
}

}  // namespace

Monodromy monodromy_numeric(const GeneralSystem& g, double period, double tol) {
  return monodromy_from([&g](double t) { return g.matrix(t); }, g.t0, period, tol);
}

Monodromy monodromy_numeric(const StructuredSystem& s, double period, double tol) {
  return monodromy_from([&s](double t) { return s.matrix(t); }, s.t0(), period, tol);
}

FloquetData exponents_from_monodromy(const Monodromy& m) {
  const double period = m.period;
  if (m.C.determinant() == 0.0) throw InversionFailure("monodromy matrix is singular");

  FloquetData fd;
  fd.period = period;
  const EigenPair2<double> ep = eig2(m.C);
  for (int k = 0; k < 2; ++k) {
    const cplx rho = ep.values(k);
    fd.multipliers[k] = rho;
    fd.exponents[k] = principal_exponent(std::log(rho) / period, period);
    fd.raw_exponents[k] = fd.exponents[k];
  }

  if (!ep.defective) {
    const Mat2c& v = ep.vectors;
    Mat2c lambda = Mat2c::Zero();
    lambda(0, 0) = fd.exponents[0];
    lambda(1, 1) = fd.exponents[1];
    fd.B = v * lambda * v.inverse();
  } else {
    // C = rho (I + N) with N nilpotent, so log C = log(rho) I + N.
    const cplx rho = 0.5 * (ep.values(0) + ep.values(1));
    const Mat2c n = (m.C.cast<cplx>() - rho * Mat2c::Identity()) / rho;
    fd.B = (principal_exponent(std::log(rho) / period, period) * period * Mat2c::Identity() + n) /
           period;
    fd.defective = true;
    fd.warnings.push_back("monodromy matrix is defective; B uses the principal logarithm with a "
                          "nilpotent correction");
  }
  return fd;
}

Mat2d periodic_part(const FundamentalMatrix& fm, const FloquetData& fd, double t) {
  if (fd.B.imag().cwiseAbs().maxCoeff() > 1e-12 * (1.0 + fd.B.cwiseAbs().maxCoeff()))
    throw InvalidArgument("periodic_part: B must be real");
  const Mat2d b = fd.B.real();
  return fm(t) * expm2<double>(-b * t);
}

namespace {

double trace_sum_residual(const std::array<cplx, 2>& lambda, double mean_trace, double period) {
  return std::abs(principal_exponent(lambda[0] + lambda[1] - mean_trace, period));
}

TraceReport trace_report(const std::function<Mat2d(double)>& coefficients, double t0, double period,
                         double tol) {
  TraceReport r;
  r.period = period;
  r.trace_integral = integrate([&](double t) { return coefficients(t).trace(); }, t0, t0 + period,
                               {1e-13, 1e-13, 4000})
                         .value;
  const Monodromy m = monodromy_from(coefficients, t0, period, tol);
  const FloquetData fd = exponents_from_monodromy(m);
  r.sum_residual = trace_sum_residual(fd.exponents, r.trace_integral / period, period);
  r.product_residual = std::abs(fd.multipliers[0] * fd.multipliers[1] - std::exp(r.trace_integral));
  return r;
}

}  // namespace

TraceReport trace_identities(const GeneralSystem& g, double period, double tol) {
  return trace_report([&g](double t) { return g.matrix(t); }, g.t0, period, tol);
}

TraceReport trace_identities(const StructuredSystem& s, double period, double tol) {
  TraceReport r = trace_report([&s](double t) { return s.matrix(t); }, s.t0(), period, tol);
  const FloquetData fd = floquet_from_averages(s, period);
  r.sum_residual_averages = trace_sum_residual(fd.exponents, r.trace_integral / period, period);
  r.product_residual_averages =
      std::abs(fd.multipliers[0] * fd.multipliers[1] - std::exp(r.trace_integral));
  return r;
}

Stability stability_verdict(const FloquetData& fd) {
  const double top = std::max(fd.exponents[0].real(), fd.exponents[1].real());
  if (top < -1e-9) return Stability::AsymptoticallyStable;
  if (top > 1e-9) return Stability::Unstable;
  return fd.defective ? Stability::Unstable : Stability::Stable;
}

}  // namespace ltv
