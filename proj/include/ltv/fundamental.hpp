#pragma once

#include <functional>

#include "ltv/numerics.hpp"
#include "ltv/sysmodel.hpp"

namespace ltv {

enum class GammaBranch { RealPositive, Zero, Imaginary };

const char* to_string(GammaBranch b);

/// Discriminant of the traceless generator M = [[-beta/2, 1], [alpha, beta/2]],
/// whose square is gamma_sq * I with gamma_sq = alpha + beta^2 / 4.
struct GammaClass {
  double gamma_sq = 0.0;
  GammaBranch branch = GammaBranch::Zero;
  /// gamma >= 0 for RealPositive, omega > 0 for Imaginary, 0 for Zero.
  double root = 0.0;

  /// +-gamma as complex numbers (i omega on the imaginary branch).
  cplx gamma() const;
};

/// |gamma_sq| <= 1e-12 (1 + |alpha| + beta^2) is classified as Zero.
GammaClass classify_gamma(double alpha, double beta);

Mat2d generator(double alpha, double beta);

/// exp(g M) = cosh(gamma g) I + sinh(gamma g)/gamma M, with the circular
/// counterpart on the imaginary branch and a Taylor series in gamma_sq g^2
/// on the Zero branch. Throws OverflowError when gamma |g| > 700.
Mat2d exp_S(const GammaClass& gc, double alpha, double beta, double g);

/// Closed-form fundamental matrix Phi(t) = exp(D(t)) of a commuting-class system.
class FundamentalMatrix {
 public:
  explicit FundamentalMatrix(StructuredSystem system);

  const StructuredSystem& system() const { return system_; }
  const GammaClass& gamma() const { return gamma_; }

  /// Phi(t) = exp(f + beta g / 2) exp_S(g). Phi(t0) is exactly I.
  Mat2d operator()(double t) const;
  /// Phi(t)^-1 = exp(-(f + beta g / 2)) exp_S(-g). Throws InversionFailure
  /// when det Phi(t) leaves the normal double range.
  Mat2d inverse(double t) const;
  /// exp(2 f + beta g), i.e. exp of the integrated trace.
  double determinant(double t) const;

 private:
  StructuredSystem system_;
  GammaClass gamma_;
};

inline Mat2d phi(const FundamentalMatrix& fm, double t) { return fm(t); }

/// x(t) = Phi(t) x0.
Vec2d solve_ivp(const FundamentalMatrix& fm, const Vec2d& x0, double t);

enum class NormVerdict {
  NormDiverges,
  NormVanishes,
  NormBounded,
  NormPeriodic,
  NormPeriodicOrQuasiperiodic,
  Inconclusive
};

const char* to_string(NormVerdict v);

struct AsymptoticsOptions {
  /// Window used for the "f + beta g / 2 == 0" probe when no period is declared.
  double probe_window = 10.0;
  double tolerance = 1e-8;
};

/// Resolved long-time behaviour of f and g, from declared metadata or inferred
/// from a declared period (the mean over one period fixes the drift).
Asymptotic primitive_asymptotics(const CoefficientFunction& c, double t0);

/// Decision table on gamma's branch and the behaviour of f and g; rows are
/// tried in order and the first match wins, otherwise Inconclusive.
NormVerdict classify_asymptotics(const FundamentalMatrix& fm, const AsymptoticsOptions& opt = {});

using Forcing = std::function<Vec2d(const Vec2d& x, double t)>;
using RightHandSide = std::function<Vec2d(double t, const Vec2d& y)>;

/// Right-hand side y' = Phi^-1(t) B(Phi(t) y, t) for x' = A x + B(x, t)
/// under the substitution x = Phi y; y(t0) = x0 because Phi(t0) = I.
RightHandSide nonhomogeneous_rhs(const FundamentalMatrix& fm, Forcing forcing);

/// Integrates the transformed system with rk45 and maps back x(t) = Phi(t) y(t).
Vec2d solve_nonhomogeneous(const FundamentalMatrix& fm, const Forcing& forcing, const Vec2d& x0,
                           double t, double rel_tol = 1e-12, double abs_tol = 1e-14);

}  // namespace ltv
