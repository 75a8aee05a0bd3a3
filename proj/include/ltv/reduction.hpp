#pragma once

// Scalar second-order equations x'' + p(t) x' + q(t) x = 0 and their planar
// counterparts.

#include "ltv/numerics.hpp"
#include "ltv/sysmodel.hpp"

namespace ltv {

struct SecondOrderEquation {
  CoefficientFunction damping;    ///< p(t)
  CoefficientFunction stiffness;  ///< q(t)
};

/// s(t) = beta a12 + a12'/a12.
double switching_term(const StructuredSystem& s, double t);

/// Eliminates x2 from the structured system. The first component obeys
///   x'' - (2 a11 + s) x' + (a11^2 + a11 s - a11' - alpha a12^2) x = 0.
/// Throws ZeroCrossing when a12 vanishes (or changes sign) on the window.
SecondOrderEquation second_order_from_structured(const StructuredSystem& s, double window_begin,
                                                 double window_end);

/// Companion form x1' = x2, x2' = -q x1 - p x2.
GeneralSystem system_from_second_order(const SecondOrderEquation& e, double t0 = 0.0);

/// Structured-system state (x1, x2) matching scalar data x(t), x'(t).
Vec2d state_from_scalar(const StructuredSystem& s, double t, double x, double xdot);

/// Damped oscillator x'' + nu x' + omega^2 x = 0 in the commuting class:
/// alpha = -1, beta = nu/omega, a12 = omega, a11 = -beta a12 = -nu.
StructuredSystem damped_oscillator_system(double nu, double omega);

/// a12 = exp(t^2), a11 = -s(t)/2 = -(beta/2) exp(t^2) - t, with closed-form
/// primitives g = (sqrt(pi)/2) erfi(t) and f = -(beta/2) g - t^2/2.
StructuredSystem erfi_example_system(double alpha, double beta);

/// First solution component at t for the system above, from the closed-form
/// fundamental matrix. Requires |t| <= 3.
double erfi_example(double t, double alpha, double beta, const Vec2d& x0 = Vec2d(1.0, 0.0));

}  // namespace ltv
