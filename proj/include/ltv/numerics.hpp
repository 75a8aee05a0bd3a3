#pragma once

// Fixed-size 2x2 linear algebra: the numeric carriers, a closed-form
// eigen-decomposition and a Padé matrix exponential. Everything here is
// templated on the scalar so the same kernels serve real and complex data.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>

#include "ltv/error.hpp"

namespace ltv {

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using cplx = std::complex<double>;
using Mat2d = Mat2<double>;
using Mat2c = Mat2<cplx>;
using Vec2d = Vec2<double>;
using Vec2c = Vec2<cplx>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const auto v = m.derived().coeff(i);
    if constexpr (std::is_floating_point_v<decltype(v)>) {
      if (!std::isfinite(v)) return false;
    } else {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  }
  return true;
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!all_finite(m)) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

/// Induced 1-norm (max column sum).
template <typename Derived>
double norm1(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

/// Largest singular value.
template <typename Scalar>
double spectral_norm(const Mat2<Scalar>& m) {
  // sigma_max^2 is the largest eigenvalue of the Hermitian matrix m^H m.
  const Mat2<Scalar> h = m.adjoint() * m;
  const double a = std::real(h(0, 0));
  const double d = std::real(h(1, 1));
  const double off = std::abs(h(0, 1));
  const double half = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), off);
  return std::sqrt(std::max(0.0, half + rad));
}

template <typename Scalar>
struct EigenPair2 {
  Vec2c values;   ///< sorted by descending real part, then descending imaginary part
  Mat2c vectors;  ///< column k pairs with values(k); unit Euclidean norm
  bool defective = false;
};

namespace detail {

inline Vec2c eigenvector_for(const Mat2c& m, cplx lambda, double scale) {
  const Vec2c from_row0(m(0, 1), lambda - m(0, 0));
  const Vec2c from_row1(lambda - m(1, 1), m(1, 0));
  const double n0 = from_row0.norm();
  const double n1 = from_row1.norm();
  if (std::max(n0, n1) <= 1e-300 + 1e-15 * scale) return Vec2c(1.0, 0.0);
  return n0 >= n1 ? Vec2c(from_row0 / n0) : Vec2c(from_row1 / n1);
}

inline bool eigen_order(const cplx& a, const cplx& b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

}  // namespace detail

/// Eigenvalues are the roots of l^2 - tr(M) l + det(M). Two eigenvalues are
/// treated as coincident when |l1 - l2| <= 1e-8 (1 + |l1| + |l2|); a coincident
/// pair on a matrix that is not a multiple of the identity is flagged defective
/// and reported with one repeated eigenvector.
template <typename Scalar>
EigenPair2<Scalar> eig2(const Mat2<Scalar>& input) {
  require_finite(input, "eig2");
  const Mat2c m = input.template cast<cplx>();

  const cplx half_trace = 0.5 * (m(0, 0) + m(1, 1));
  const cplx half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const cplx root = std::sqrt(half_diff * half_diff + m(0, 1) * m(1, 0));
  const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);

  // Take the larger-modulus root first, recover the other from the product.
  cplx big = (std::real(std::conj(half_trace) * root) >= 0.0) ? half_trace + root : half_trace - root;
  cplx small = (big != cplx(0.0)) ? det / big : half_trace - (big - half_trace);
  if (!detail::eigen_order(big, small) && big != small) std::swap(big, small);

  EigenPair2<Scalar> out;
  out.values = Vec2c(big, small);

  const double scale = m.cwiseAbs().maxCoeff();
  const bool coincident =
      std::abs(big - small) <= 1e-8 * (1.0 + std::abs(big) + std::abs(small));
  if (coincident) {
    const cplx mean = 0.5 * (big + small);
    const double off = std::max({std::abs(m(0, 1)), std::abs(m(1, 0)), std::abs(m(0, 0) - m(1, 1))});
    if (off <= 1e-8 * (1.0 + std::abs(m(0, 0)) + std::abs(m(1, 1)))) {
      out.vectors = Mat2c::Identity();
    } else {
      const Vec2c v = detail::eigenvector_for(m, mean, scale);
      out.vectors.col(0) = v;
      out.vectors.col(1) = v;
      out.defective = true;
    }
    return out;
  }
  out.vectors.col(0) = detail::eigenvector_for(m, big, scale);
  out.vectors.col(1) = detail::eigenvector_for(m, small, scale);
  return out;
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant. Throws OverflowError when the result is not representable.
template <typename Scalar>
Mat2<Scalar> expm2(const Mat2<Scalar>& input) {
  require_finite(input, "expm2");
  using M = Mat2<Scalar>;
  constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                          1187353796428800.0,  129060195264000.0,   10559470521600.0,
                          670442572800.0,      33522128640.0,       1323241920.0,
                          40840800.0,          960960.0,            16380.0,
                          182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm = norm1(input);
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  const M a = input / Scalar(std::ldexp(1.0, squarings));

  const M id = M::Identity();
  const M a2 = a * a;
  const M a4 = a2 * a2;
  const M a6 = a4 * a2;
  const M u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                   b[3] * a2 + b[1] * id);
  const M v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
              b[2] * a2 + b[0] * id;

  M r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;

  if (!all_finite(r)) throw OverflowError("expm2: result overflows double precision");
  return r;
}

}  // namespace ltv
