#include "ltv/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ltv/error.hpp"
#include "ltv/fundamental.hpp"
#include "ltv/special.hpp"

namespace ltv {

double switching_term(const StructuredSystem& s, double t) {
  const double q = s.a12()(t);
  if (q == 0.0) throw ZeroCrossing(t);
  return s.beta() * q + s.a12().derivative(t) / q;
}

SecondOrderEquation second_order_from_structured(const StructuredSystem& s, double window_begin,
                                                 double window_end) {
  if (!(window_end > window_begin)) throw InvalidArgument("reduction window must be non-empty");

  // Dense scan for sign changes or near-zeros of a12.
  const CoefficientFunction& a12 = s.a12();
  constexpr int kScan = 512;
  double scale = 0.0;
  std::vector<double> values(kScan + 1);
  for (int k = 0; k <= kScan; ++k) {
    const double t = window_begin + (window_end - window_begin) * k / kScan;
    values[k] = a12(t);
    scale = std::max(scale, std::abs(values[k]));
  }
  for (int k = 0; k <= kScan; ++k) {
    const double t = window_begin + (window_end - window_begin) * k / kScan;
    if (std::abs(values[k]) <= 1e-12 * (1.0 + scale)) throw ZeroCrossing(t);
    if (k > 0 && (values[k] > 0.0) != (values[k - 1] > 0.0)) throw ZeroCrossing(t);
  }

  const StructuredSystem sys = s;
  CoefficientFunction p(
      [sys](double t) {
        return -(2.0 * sys.a11()(t) + switching_term(sys, t));
      },
      "p(t)");
  CoefficientFunction q(
      [sys](double t) {
        const double a11 = sys.a11()(t);
        const double a12 = sys.a12()(t);
        return a11 * a11 + a11 * switching_term(sys, t) - sys.a11().derivative(t) -
               sys.alpha() * a12 * a12;
      },
      "q(t)");
  return {std::move(p), std::move(q)};
}

GeneralSystem system_from_second_order(const SecondOrderEquation& e, double t0) {
  const CoefficientFunction p = e.damping;
  const CoefficientFunction q = e.stiffness;
  CoefficientFunction lower([q](double t) { return -q(t); }, "-q(t)");
  CoefficientFunction diag([p](double t) { return -p(t); }, "-p(t)");
  return GeneralSystem{CoefficientFunction::constant(0.0), CoefficientFunction::constant(1.0),
                       std::move(lower), std::move(diag), t0};
}

Vec2d state_from_scalar(const StructuredSystem& s, double t, double x, double xdot) {
  const double a12 = s.a12()(t);
  if (a12 == 0.0) throw ZeroCrossing(t);
  return {x, (xdot - s.a11()(t) * x) / a12};
}

StructuredSystem damped_oscillator_system(double nu, double omega) {
  if (!(omega > 0.0)) throw InvalidArgument("damped oscillator needs omega > 0");
  const double beta = nu / omega;
  return StructuredSystem(CoefficientFunction::constant(-beta * omega),
                          CoefficientFunction::constant(omega), -1.0, beta);
}

StructuredSystem erfi_example_system(double alpha, double beta) {
  constexpr double half_sqrt_pi = 0.5 / std::numbers::inv_sqrtpi;
  CoefficientFunction a12 =
      CoefficientFunction([](double t) { return std::exp(t * t); }, "exp(t^2)")
          .with_antiderivative([](double t) { return half_sqrt_pi * erfi(t); })
          .with_derivative([](double t) { return 2.0 * t * std::exp(t * t); });
  CoefficientFunction a11 =
      CoefficientFunction([beta](double t) { return -0.5 * beta * std::exp(t * t) - t; },
                          "-(beta/2)*exp(t^2) - t")
          .with_antiderivative(
              [beta](double t) { return -0.5 * beta * half_sqrt_pi * erfi(t) - 0.5 * t * t; })
          .with_derivative([beta](double t) { return -beta * t * std::exp(t * t) - 1.0; });
  return StructuredSystem(std::move(a11), std::move(a12), alpha, beta);
}

double erfi_example(double t, double alpha, double beta, const Vec2d& x0) {
  if (!(std::abs(t) <= 3.0)) throw OverflowError("erfi_example: |t| must not exceed 3");
  const FundamentalMatrix fm(erfi_example_system(alpha, beta));
  return solve_ivp(fm, x0, t)(0);
}

}  // namespace ltv
