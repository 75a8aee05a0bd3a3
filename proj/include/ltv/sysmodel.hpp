#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltv/expr.hpp"
#include "ltv/numerics.hpp"

namespace ltv {

/// Declared long-time behaviour of a coefficient's primitive
/// (the integral of the coefficient from t0 to t, as t grows).
enum class Asymptotic { Bounded, TendsToPlusInfinity, TendsToMinusInfinity, TendsToZero, Unknown };

const char* to_string(Asymptotic a);

/// A real scalar function of time plus optional closed-form antiderivative,
/// derivative, period and asymptotic metadata. Copies share the underlying
/// callables; all members are immutable.
class CoefficientFunction {
 public:
  using Fn = std::function<double(double)>;

  CoefficientFunction() = default;
  explicit CoefficientFunction(Fn value, std::string label = "<native>");

  static CoefficientFunction from_expression(const Expression& e);
  static CoefficientFunction constant(double c);

  double operator()(double t) const { return (*value_)(t); }

  /// Attaches F with F' = value; spot-checks the derivative by central
  /// differences on `window` and throws InvalidArgument on mismatch.
  CoefficientFunction with_antiderivative(Fn antiderivative, double window_begin = 0.0,
                                          double window_end = 1.0) const;
  CoefficientFunction with_derivative(Fn derivative) const;
  /// Checks value(t + T) == value(t) to 1e-10 on a probe grid over one period.
  CoefficientFunction with_period(double period) const;
  CoefficientFunction with_primitive_behaviour(Asymptotic behaviour) const;

  bool has_antiderivative() const { return static_cast<bool>(antiderivative_); }
  double antiderivative(double t) const { return (*antiderivative_)(t); }
  /// Closed-form derivative when supplied, else 4th-order central differences
  /// with h = 1e-5 (1 + |t|).
  double derivative(double t) const;
  std::optional<double> period() const { return period_; }
  Asymptotic primitive_behaviour() const { return behaviour_; }
  /// Set when the function is known not to depend on t.
  std::optional<double> constant_value() const { return constant_; }
  const std::string& label() const { return label_; }

 private:
  std::shared_ptr<const Fn> value_;
  std::shared_ptr<const Fn> antiderivative_;
  std::shared_ptr<const Fn> derivative_;
  std::optional<double> period_;
  std::optional<double> constant_;
  Asymptotic behaviour_ = Asymptotic::Unknown;
  std::string label_;
};

/// Unrestricted planar system x' = A(t) x.
struct GeneralSystem {
  CoefficientFunction a11, a12, a21, a22;
  double t0 = 0.0;

  Mat2d matrix(double t) const;
};

/// Commuting-class system: a21 = alpha a12, a22 = a11 + beta a12.
/// Primitives f, g are memoized behind a mutex, so a StructuredSystem can be
/// evaluated from several threads.
class StructuredSystem {
 public:
  StructuredSystem(CoefficientFunction a11, CoefficientFunction a12, double alpha, double beta,
                   double t0 = 0.0);

  const CoefficientFunction& a11() const { return a11_; }
  const CoefficientFunction& a12() const { return a12_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double t0() const { return t0_; }

  Mat2d matrix(double t) const;
  /// D(t), the entrywise integral of A from t0 to t.
  Mat2d primitive(double t) const;
  double f(double t) const;
  double g(double t) const;

  GeneralSystem as_general() const;

 private:
  struct Cache;

  CoefficientFunction a11_, a12_;
  double alpha_, beta_, t0_;
  std::shared_ptr<Cache> cache_;
};

inline double f_of(const StructuredSystem& s, double t) { return s.f(t); }
inline double g_of(const StructuredSystem& s, double t) { return s.g(t); }

/// n Chebyshev-Gauss-Lobatto points on [a, b].
std::vector<double> chebyshev_grid(double a, double b, std::size_t n = 33);

/// Least-squares fit of alpha, beta; accepts when the largest pointwise
/// residual is at most tol (1 + max |a12|). Throws DegenerateA12 or
/// NotCommutingClass.
StructuredSystem fit_structure(const GeneralSystem& g, std::span<const double> grid, double tol);

struct FitReport {
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;   ///< max pointwise residual
  double threshold = 0.0;  ///< tol (1 + max |a12|)
};

/// Same computation as fit_structure without the accept/reject decision.
FitReport fit_constants(const GeneralSystem& g, std::span<const double> grid, double tol);

/// B with b11 = f(t0 + T)/T, b12 = g(t0 + T)/T, b21 = alpha b12, b22 = b11 + beta b12.
Mat2d average_matrix(const StructuredSystem& s, double period);

/// True when a11 and a12 are both declared (or known constant) with period T.
bool declared_periodic(const StructuredSystem& s, double period);

/// max over the grid of |A D - D A| / (1 + |A| |D|) (Frobenius norms).
double commutation_residual(const StructuredSystem& s, std::span<const double> grid);
/// max over the grid of |A A' - A' A| / (1 + |A| |A'|), A' by central differences.
double derivative_commutation_residual(const StructuredSystem& s, std::span<const double> grid);

}  // namespace ltv
