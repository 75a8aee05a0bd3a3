#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ltv/fundamental.hpp"
#include "ltv/numerics.hpp"
#include "ltv/sysmodel.hpp"

namespace ltv {

/// Floquet normal-form data for a T-periodic planar system.
struct FloquetData {
  Mat2c B;                          ///< constant generator, Phi(t) = P(t) exp(B t)
  std::array<cplx, 2> exponents{};  ///< imaginary parts in (-pi/T, pi/T]
  std::array<cplx, 2> multipliers{};
  double period = 0.0;
  /// Exponents before reduction to the principal strip (eigenvalues of B).
  std::array<cplx, 2> raw_exponents{};
  bool reduced = false;    ///< some raw exponent was shifted by a multiple of 2 pi i / T
  bool defective = false;  ///< B (or the monodromy) has a single eigenvector
  std::vector<std::string> warnings;
};

/// Monodromy matrix C = Phi(t0)^-1 Phi(t0 + T) from numerical integration.
struct Monodromy {
  Mat2d C;
  double period = 0.0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
};

/// Shifts the imaginary part of lambda into (-pi/T, pi/T].
cplx principal_exponent(cplx lambda, double period);

/// Smallest distance between the two exponent pairs over both pairings,
/// with imaginary parts compared modulo 2 pi / T.
double exponent_distance(const std::array<cplx, 2>& a, const std::array<cplx, 2>& b,
                         double period);

/// Exponents as eigenvalues of the averaged matrix B = D(T)/T. The closed form
/// mean(a11) + beta mean(a12)/2 +- gamma mean(a12) is cross-checked against
/// eig2(B); disagreement beyond 1e-10 throws ConsistencyError.
FloquetData floquet_from_averages(const StructuredSystem& s, double period);

/// Propagator X(t1) with X' = A(t) X, X(t0) = I, integrated column by column.
Mat2d propagator_numeric(const std::function<Mat2d(double)>& coefficients, double t0, double t1,
                         double rel_tol, double abs_tol);

/// Integrates from t0 over one period; independent of the commuting structure.
Monodromy monodromy_numeric(const GeneralSystem& g, double period, double tol = 1e-10);
Monodromy monodromy_numeric(const StructuredSystem& s, double period, double tol = 1e-10);

/// rho = eig2(C), lambda = (ln|rho| + i arg rho)/T with arg in (-pi, pi].
/// B = V diag(lambda) V^-1 when C has two eigenvectors; otherwise the
/// principal logarithm with its nilpotent part, flagged defective.
FloquetData exponents_from_monodromy(const Monodromy& m);

/// P(t) = Phi(t) exp(-B t). Requires a real B.
Mat2d periodic_part(const FundamentalMatrix& fm, const FloquetData& fd, double t);

struct TraceReport {
  double period = 0.0;
  double trace_integral = 0.0;  ///< integral of tr A over one period
  /// |lambda+ + lambda- - mean trace| reduced modulo 2 pi i / T.
  double sum_residual = 0.0;
  /// |rho+ rho- - exp(trace_integral)|.
  double product_residual = 0.0;
  /// Same residuals for the averaged-matrix exponents (structured input only).
  std::optional<double> sum_residual_averages;
  std::optional<double> product_residual_averages;
};

TraceReport trace_identities(const GeneralSystem& g, double period, double tol = 1e-12);
TraceReport trace_identities(const StructuredSystem& s, double period, double tol = 1e-12);

enum class Stability { AsymptoticallyStable, Stable, Unstable };

const char* to_string(Stability s);

/// Sign test on max Re lambda with a 1e-9 band around zero; a defective B on
/// the band is Unstable (secular growth).
Stability stability_verdict(const FloquetData& fd);

}  // namespace ltv
