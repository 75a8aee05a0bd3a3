#pragma once

#include <cstddef>
#include <functional>

namespace ltv {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_subdivisions = 2000;
};

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature of f over [a, b].
/// b < a yields the negated integral. Throws QuadratureError when the
/// subdivision budget runs out before the tolerance is met, or when the
/// integrand is not finite. A tolerance below the rounding floor of the sum
/// ends early; the reported error is then that floor.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opt = {});

}  // namespace ltv
