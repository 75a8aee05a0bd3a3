#include "ltv/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ltv {
namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// sum_n x^(2n+1) / (n! (2n+1)), scaled by `scale` from the first term on.
// All terms share the sign of x, so there is no cancellation.
double odd_series(double x, double scale) {
  const double x2 = x * x;
  double term = x * scale;  // n = 0 term of sum x^(2n+1)/n!
  double sum = term;
  for (int n = 1; n < 5000; ++n) {
    term *= x2 / n;
    const double contrib = term / (2 * n + 1);
    sum += contrib;
    if (std::abs(contrib) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// F(x) ~ 1/(2x) sum_n (2n-1)!! / (2x^2)^n, truncated at the smallest term.
double dawson_asymptotic(double x) {
  const double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 200; ++n) {
    const double next = term * (2 * n - 1) * inv;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum / (2.0 * x);
}

}  // namespace

double dawson(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  if (ax > 10.0) return dawson_asymptotic(x);
  // exp(-x^2) folded into the leading term keeps intermediate values small.
  return odd_series(x, std::exp(-x * x));
}

double erfi(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  if (ax <= 4.0) return kTwoOverSqrtPi * odd_series(x, 1.0);
  const double x2 = x * x;
  if (x2 > 709.0) {
    const double v = kTwoOverSqrtPi * std::exp(x2 - 1.0) * (std::numbers::e * dawson(x));
    return std::isfinite(v) ? v : std::copysign(std::numeric_limits<double>::infinity(), x);
  }
  return kTwoOverSqrtPi * std::exp(x2) * dawson(x);
}

}  // namespace ltv
