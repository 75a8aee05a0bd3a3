#pragma once

namespace ltv {

/// Dawson's integral F(x) = exp(-x^2) * integral_0^x exp(s^2) ds.
double dawson(double x);

/// Imaginary error function erfi(x) = -i erf(ix) = (2/sqrt(pi)) integral_0^x exp(s^2) ds.
/// Returns +-inf past |x| ~ 26.6 where the result leaves double range.
double erfi(double x);

}  // namespace ltv
